"""Closed-form solitary-wave profiles, traveling-wave assembly, and profile residuals.

The long-wave profile  w(x) = ((p+1)(p+2) lam3 / 2 beta)^{1/p} sech^{2/p}(sqrt(lam3) p x / 2)
solves  -w'' + lam3 w = (beta/(p+1)) w^{p+1}; for p = 1, beta = 1 it is the classical
3C sech^2(sqrt(C) x / 2) soliton with lam3 = C.  The envelope profile
psi(x) = (lam / 2 tau)^{1/q} sech^{2/q}(sqrt(lam) q x / 2)  solves
-psi'' + lam psi = (q+2) tau psi^{q+1}; pass tau = gamma/(q+2) to obtain the stationary
profile of the coupled system's envelope equation with coefficient gamma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conserved import mass
from .model import Params21, State21, signed_power_array
from .spectral import (
    COMPLEX,
    REAL,
    Field,
    Grid,
    boost_phase,
    l2_norm2,
    translate,
)


@dataclass(frozen=True)
class WaveParams:
    """Phase frequencies and speed of a traveling solitary wave."""

    omega1: float
    omega2: float
    c: float

    @property
    def sigma1(self) -> float:
        return self.omega1 - self.c**2 / 4.0

    @property
    def sigma2(self) -> float:
        return self.omega2 - self.c**2 / 4.0

    @classmethod
    def from_multipliers(cls, sigma1: float, sigma2: float, c: float) -> "WaveParams":
        return cls(omega1=sigma1 + c**2 / 4.0, omega2=sigma2 + c**2 / 4.0, c=c)


def kdv_profile(p, beta: float, lam3: float, grid: Grid) -> Field:
    """Long-wave solitary profile centered at x = 0."""
    pf = float(p)
    if lam3 <= 0:
        raise ValueError("the profile multiplier lam3 must be positive")
    if beta <= 0:
        raise ValueError("beta must be positive for a focusing long-wave profile")
    if pf <= 0:
        raise ValueError("p must be positive")
    amp = ((pf + 1.0) * (pf + 2.0) * lam3 / (2.0 * beta)) ** (1.0 / pf)
    vals = amp / np.cosh(np.sqrt(lam3) * pf * grid.x / 2.0) ** (2.0 / pf)
    return Field(grid, vals, REAL)


def nls_profile(q: float, tau: float, lam: float, grid: Grid) -> Field:
    """Envelope solitary profile centered at x = 0 (focusing: tau > 0)."""
    if tau <= 0:
        raise ValueError("tau must be positive (defocusing has no such profile)")
    if lam <= 0:
        raise ValueError("the profile multiplier lam must be positive")
    if q <= 0:
        raise ValueError("q must be positive")
    amp = (lam / (2.0 * tau)) ** (1.0 / q)
    vals = amp / np.cosh(np.sqrt(lam) * q * grid.x / 2.0) ** (2.0 / q)
    return Field(grid, vals, REAL)


def _bisect_mass(make_profile, target: float, tol: float) -> float:
    """Bisection on the monotone multiplier -> mass map (powers below 4)."""
    lo, hi = 1e-8, 1.0
    while mass(make_profile(hi)) < target:
        hi *= 4.0
        if hi > 1e12:
            raise RuntimeError("mass target unreachable on this grid")
    while mass(make_profile(lo)) > target:
        lo /= 4.0
        if lo < 1e-30:
            raise RuntimeError("mass target unreachable on this grid")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        m = mass(make_profile(mid))
        if abs(m - target) <= tol:
            return mid
        if m < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def kdv_multiplier_for_mass(p, beta: float, target: float, grid: Grid,
                            tol: float = 1e-10) -> float:
    return _bisect_mass(lambda lam: kdv_profile(p, beta, lam, grid), target, tol)


def nls_multiplier_for_mass(q: float, tau: float, target: float, grid: Grid,
                            tol: float = 1e-10) -> float:
    return _bisect_mass(lambda lam: nls_profile(q, tau, lam, grid), target, tol)


def assemble_traveling(phi1: Field, phi2: Field, w: Field, wp: WaveParams,
                       t: float = 0.0) -> State21:
    """Traveling-wave state: u_j = e^{i w_j t} e^{i c (x - ct)/2} phi_j(x - ct), v = w(x - ct).

    The half-speed phase tilt is attached to the profiles and the shift is realized by
    the exact spectral translation, so the assembled state is periodic and band-limited.
    """
    grid = phi1.grid
    tilt = boost_phase(grid, wp.c / 2.0)
    u1 = Field(grid, tilt * phi1.values, COMPLEX)
    u2 = Field(grid, tilt * phi2.values, COMPLEX)
    shift = -wp.c * t
    u1 = translate(u1, shift)
    u2 = translate(u2, shift)
    v = translate(Field(grid, np.real(w.values), REAL), shift)
    phase1 = np.exp(1j * wp.omega1 * t)
    phase2 = np.exp(1j * wp.omega2 * t)
    return State21(
        u1=Field(grid, phase1 * u1.values, COMPLEX),
        u2=Field(grid, phase2 * u2.values, COMPLEX),
        v=v,
        t=t,
    )


def profile_residual(phi1: Field, phi2: Field, w: Field, sigma1: float,
                     sigma2: float, c: float, prm: Params21) -> float:
    """Sup norm of the stationary-system residuals for a profile triple.

    r_j = -phi_j'' + sigma_j phi_j - gamma_j |phi_j|^{q_j} phi_j - alpha_j phi_j w
    r_w = -w'' + c w - (beta/(p+1)) w^{p+1} - sum_j (alpha_j/2) |phi_j|^2
    """
    grid = phi1.grid

    def d2(arr):
        return np.fft.ifft(-grid.k**2 * np.fft.fft(arr))

    f1, f2 = phi1.values, phi2.values
    wv = np.real(w.values)
    r1 = -d2(f1) + sigma1 * f1 - prm.gamma1 * np.abs(f1) ** prm.q1 * f1 \
        - prm.alpha1 * f1 * wv
    r2 = -d2(f2) + sigma2 * f2 - prm.gamma2 * np.abs(f2) ** prm.q2 * f2 \
        - prm.alpha2 * f2 * wv
    rw = -np.real(d2(wv)) + c * wv \
        - prm.beta / float(prm.p + 1) * signed_power_array(wv, prm.p + 1) \
        - 0.5 * (prm.alpha1 * np.abs(f1) ** 2 + prm.alpha2 * np.abs(f2) ** 2)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2)), np.max(np.abs(rw))))


def traveling_momentum(phi1: Field, phi2: Field, w: Field, c: float) -> float:
    """Momentum of the assembled traveling state: ||w||^2 - (c/2)(r + l)."""
    return l2_norm2(w) - 0.5 * c * (l2_norm2(phi1) + l2_norm2(phi2))
