"""Parameter sets, state containers, admissibility checks, and nonlinear right-hand sides.

Two systems are modeled.  The 2+1 system couples two complex envelopes u1, u2 to one real
long-wave field v; the 1+2 system couples one envelope u to two long-wave fields v1, v2.
Right-hand sides return only the nonlinear parts in d/dt form; the stiff linear groups are
applied exactly by the integrator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spectral import COMPLEX, REAL, Field, Grid, dealias_mask


class ParameterError(ValueError):
    """Inadmissible model parameters."""


def as_odd_fraction(p, name: str = "p") -> Fraction:
    """Coerce to an exact positive rational with odd denominator (in lowest terms)."""
    if isinstance(p, float):
        if not p.is_integer():
            raise ParameterError(
                f"{name} must be given exactly (int, Fraction, or 'n1/n2' string), "
                f"got float {p!r}"
            )
        p = int(p)
    frac = Fraction(p)
    if frac <= 0:
        raise ParameterError(f"{name} must be positive, got {frac}")
    if frac.denominator % 2 == 0:
        raise ParameterError(
            f"{name} must be a fraction with odd denominator, got {frac}"
        )
    return frac


@dataclass(frozen=True)
class Params21:
    """Coefficients of the 2+1 system (two envelopes, one long wave)."""

    alpha1: float = 1.0
    alpha2: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    beta: float = 1.0
    q1: float = 2.0
    q2: float = 2.0
    p: Fraction = Fraction(1)

    def __post_init__(self):
        if self.q1 <= 0 or self.q2 <= 0:
            raise ParameterError("nonlinearity powers q1, q2 must be positive")
        object.__setattr__(self, "p", as_odd_fraction(self.p, "p"))

    @property
    def tau1(self) -> float:
        return 2.0 * self.gamma1 / (self.q1 + 2.0)

    @property
    def tau2(self) -> float:
        return 2.0 * self.gamma2 / (self.q2 + 2.0)

    @property
    def tau(self) -> float:
        pf = float(self.p)
        return 2.0 * self.beta / ((pf + 1.0) * (pf + 2.0))


@dataclass(frozen=True)
class Params12:
    """Coefficients of the 1+2 system (one envelope, two long waves)."""

    alpha1: float = 1.0
    alpha2: float = 1.0
    gamma: float = 1.0
    q: float = 2.0
    beta1: float = 1.0
    beta2: float = 1.0
    p1: Fraction = Fraction(1)
    p2: Fraction = Fraction(1)

    def __post_init__(self):
        if self.q <= 0:
            raise ParameterError("nonlinearity power q must be positive")
        object.__setattr__(self, "p1", as_odd_fraction(self.p1, "p1"))
        object.__setattr__(self, "p2", as_odd_fraction(self.p2, "p2"))

    @property
    def a(self) -> float:
        return 2.0 * self.gamma / (self.q + 2.0)

    @property
    def b1(self) -> float:
        p1 = float(self.p1)
        return 2.0 * self.beta1 / ((p1 + 1.0) * (p1 + 2.0))

    @property
    def b2(self) -> float:
        p2 = float(self.p2)
        return 2.0 * self.beta2 / ((p2 + 1.0) * (p2 + 2.0))


def _check_triple(fields, kinds):
    grid = fields[0].grid
    for f, kind in zip(fields, kinds):
        if f.grid is not grid and f.grid != grid:
            raise ValueError("all state components must live on one grid")
        if f.kind != kind:
            raise ValueError(f"state component has kind {f.kind!r}, expected {kind!r}")
    return grid


@dataclass(frozen=True)
class State21:
    u1: Field
    u2: Field
    v: Field
    t: float = 0.0

    def __post_init__(self):
        grid = _check_triple((self.u1, self.u2, self.v), (COMPLEX, COMPLEX, REAL))
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class State12:
    u: Field
    v1: Field
    v2: Field
    t: float = 0.0

    def __post_init__(self):
        grid = _check_triple((self.u, self.v1, self.v2), (COMPLEX, REAL, REAL))
        object.__setattr__(self, "grid", grid)


class Regime(enum.Enum):
    GLOBAL_GUARANTEED = "GlobalGuaranteed"
    LOCAL_ONLY = "LocalOnly"


def check_global_regime(prm) -> Regime:
    """Classify parameters: global continuation guaranteed, or local theory only.

    Global regime: long-wave powers in [1, 4/3) and each envelope power below 4
    whenever its focusing coefficient is positive (no bound when nonpositive).
    """
    if isinstance(prm, Params21):
        long_ok = 1 <= prm.p < Fraction(4, 3)
        short_ok = (prm.tau1 <= 0 or prm.q1 < 4) and (prm.tau2 <= 0 or prm.q2 < 4)
    elif isinstance(prm, Params12):
        long_ok = 1 <= prm.p1 < Fraction(4, 3) and 1 <= prm.p2 < Fraction(4, 3)
        short_ok = prm.a <= 0 or prm.q < 4
    else:
        raise TypeError(f"unsupported parameter type {type(prm)!r}")
    return Regime.GLOBAL_GUARANTEED if (long_ok and short_ok) else Regime.LOCAL_ONLY


def signed_power_array(a: np.ndarray, p) -> np.ndarray:
    """Pointwise a^p for real samples, p = n1/n2 with n2 odd: sign(a)^n1 |a|^p."""
    frac = as_odd_fraction(p)
    mag = np.abs(a) ** float(frac)
    if frac.numerator % 2:
        return np.sign(a) * mag
    return mag


def signed_power(v: Field, p) -> Field:
    """Odd-root power of a real field: v^p := sign(v)^{n1} |v|^{n1/n2}."""
    if v.kind != REAL:
        raise ValueError("signed_power acts on real-kind fields")
    return Field(v.grid, signed_power_array(np.real(v.values), p), REAL)


def _project(mask, arr):
    return np.fft.ifft(mask * np.fft.fft(arr))


def rhs21_arrays(u1, u2, v, grid: Grid, prm: Params21, apply_dealias: bool = True):
    """Nonlinear tendencies of the 2+1 system on raw sample arrays.

    du_j = i (gamma_j |u_j|^{q_j} u_j + alpha_j u_j v)
    dv   = -beta d/dx(v^{p+1})/(p+1) - 1/2 d/dx(alpha1|u1|^2 + alpha2|u2|^2)
    with the long-wave term in conservative form so that dv has exact zero mean.
    """
    mask = dealias_mask(grid) if apply_dealias else None
    if apply_dealias:
        u1 = _project(mask, u1)
        u2 = _project(mask, u2)
        v = np.real(_project(mask, v))
    n1 = prm.gamma1 * np.abs(u1) ** prm.q1 * u1 + prm.alpha1 * u1 * v
    n2 = prm.gamma2 * np.abs(u2) ** prm.q2 * u2 + prm.alpha2 * u2 * v
    vp1 = signed_power_array(v, prm.p + 1)
    flux = prm.beta / float(prm.p + 1) * vp1 + 0.5 * (
        prm.alpha1 * np.abs(u1) ** 2 + prm.alpha2 * np.abs(u2) ** 2
    )
    if apply_dealias:
        n1 = _project(mask, n1)
        n2 = _project(mask, n2)
        flux = _project(mask, flux)
    ik = 1j * grid.k
    ik[grid.N // 2] = 0.0
    dv = -np.fft.ifft(ik * np.fft.fft(flux))
    return 1j * n1, 1j * n2, np.real(dv)


def rhs12_arrays(u, v1, v2, grid: Grid, prm: Params12, apply_dealias: bool = True):
    """Nonlinear tendencies of the 1+2 system on raw sample arrays."""
    mask = dealias_mask(grid) if apply_dealias else None
    if apply_dealias:
        u = _project(mask, u)
        v1 = np.real(_project(mask, v1))
        v2 = np.real(_project(mask, v2))
    nu = prm.gamma * np.abs(u) ** prm.q * u + (prm.alpha1 * v1 + prm.alpha2 * v2) * u
    flux1 = prm.beta1 / float(prm.p1 + 1) * signed_power_array(v1, prm.p1 + 1) \
        + 0.5 * prm.alpha1 * np.abs(u) ** 2
    flux2 = prm.beta2 / float(prm.p2 + 1) * signed_power_array(v2, prm.p2 + 1) \
        + 0.5 * prm.alpha2 * np.abs(u) ** 2
    if apply_dealias:
        nu = _project(mask, nu)
        flux1 = _project(mask, flux1)
        flux2 = _project(mask, flux2)
    ik = 1j * grid.k
    ik[grid.N // 2] = 0.0
    dv1 = -np.fft.ifft(ik * np.fft.fft(flux1))
    dv2 = -np.fft.ifft(ik * np.fft.fft(flux2))
    return 1j * nu, np.real(dv1), np.real(dv2)


def rhs21(s: State21, prm: Params21, apply_dealias: bool = True):
    du1, du2, dv = rhs21_arrays(
        s.u1.values, s.u2.values, np.real(s.v.values), s.grid, prm, apply_dealias
    )
    return (
        Field(s.grid, du1, COMPLEX),
        Field(s.grid, du2, COMPLEX),
        Field(s.grid, dv, REAL),
    )


def rhs12(s: State12, prm: Params12, apply_dealias: bool = True):
    du, dv1, dv2 = rhs12_arrays(
        s.u.values, np.real(s.v1.values), np.real(s.v2.values), s.grid, prm, apply_dealias
    )
    return (
        Field(s.grid, du, COMPLEX),
        Field(s.grid, dv1, REAL),
        Field(s.grid, dv2, REAL),
    )
