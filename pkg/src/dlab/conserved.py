"""Invariants of motion for both systems and drift reporting.

The 2+1 system conserves the energy E, the translation momentum H, and the envelope
masses Q(u_j); the 1+2 system conserves K, G, and Q(u).  The momentum functionals here
are the dynamically conserved ones,

    H = int v^2 dx + sum_j Im int u_j conj(d/dx u_j) dx,
    G = int (v1^2 + v2^2) dx + Im int u conj(d/dx u) dx,

verified against the flow to round-off.  Quadrature is the periodic trapezoid rule,
which is exact for band-limited integrands and matches the Plancherel norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Params12, Params21, State12, State21, signed_power_array
from .spectral import Field, Grid, l2_norm2

DRIFT_FLOOR = 1e-12


def _quad(grid: Grid, samples) -> float:
    return float(np.real(np.sum(samples))) * grid.dx


def _dx(grid: Grid, arr, odd: bool = True):
    ik = 1j * grid.k.copy()
    if odd:
        ik[grid.N // 2] = 0.0
    return np.fft.ifft(ik * np.fft.fft(arr))


def energy21_arrays(u1, u2, v, grid: Grid, prm: Params21) -> float:
    u1x, u2x, vx = _dx(grid, u1), _dx(grid, u2), _dx(grid, v)
    dens = (
        np.abs(u1x) ** 2
        - prm.tau1 * np.abs(u1) ** (prm.q1 + 2)
        - prm.alpha1 * np.abs(u1) ** 2 * np.real(v)
        + np.abs(u2x) ** 2
        - prm.tau2 * np.abs(u2) ** (prm.q2 + 2)
        - prm.alpha2 * np.abs(u2) ** 2 * np.real(v)
        + np.abs(vx) ** 2
        - prm.tau * signed_power_array(np.real(v), prm.p + 2)
    )
    return _quad(grid, dens)


def energy21(s: State21, prm: Params21) -> float:
    return energy21_arrays(s.u1.values, s.u2.values, np.real(s.v.values), s.grid, prm)


def momentum_density(u, grid: Grid) -> float:
    """Im int u conj(u') for one complex component."""
    return _quad(grid, np.imag(u * np.conj(_dx(grid, u))))


def momentum_h_arrays(u1, u2, v, grid: Grid) -> float:
    return (
        _quad(grid, np.real(v) ** 2)
        + momentum_density(u1, grid)
        + momentum_density(u2, grid)
    )


def momentum_h(s: State21) -> float:
    """Conserved translation momentum of the 2+1 system."""
    return momentum_h_arrays(s.u1.values, s.u2.values, np.real(s.v.values), s.grid)


def mass(f: Field) -> float:
    return l2_norm2(f)


def energy12_arrays(u, v1, v2, grid: Grid, prm: Params12) -> float:
    ux, v1x, v2x = _dx(grid, u), _dx(grid, v1), _dx(grid, v2)
    v1r, v2r = np.real(v1), np.real(v2)
    dens = (
        np.abs(v1x) ** 2
        - prm.b1 * signed_power_array(v1r, prm.p1 + 2)
        - prm.alpha1 * np.abs(u) ** 2 * v1r
        + np.abs(v2x) ** 2
        - prm.b2 * signed_power_array(v2r, prm.p2 + 2)
        - prm.alpha2 * np.abs(u) ** 2 * v2r
        + np.abs(ux) ** 2
        - prm.a * np.abs(u) ** (prm.q + 2)
    )
    return _quad(grid, dens)


def energy12(s: State12, prm: Params12) -> float:
    return energy12_arrays(
        s.u.values, np.real(s.v1.values), np.real(s.v2.values), s.grid, prm
    )


def momentum_g(s: State12) -> float:
    """Conserved translation momentum of the 1+2 system."""
    g = s.grid
    return (
        _quad(g, np.real(s.v1.values) ** 2 + np.real(s.v2.values) ** 2)
        + momentum_density(s.u.values, g)
    )


@dataclass(frozen=True)
class ConservedReport:
    """One monitor row: invariant values at time t and relative drifts vs t=0."""

    time: float
    energy: float
    momentum: float
    masses: tuple
    drift_energy: float
    drift_momentum: float
    drift_masses: tuple

    CSV_HEADER_21 = "t,E,H,Q1,Q2,driftE,driftH,driftQ1,driftQ2"
    CSV_HEADER_12 = "t,K,G,Q,driftK,driftG,driftQ"

    def csv_row(self, fmt: str = "%.17g") -> str:
        cells = [self.time, self.energy, self.momentum, *self.masses,
                 self.drift_energy, self.drift_momentum, *self.drift_masses]
        return ",".join(fmt % c for c in cells)


def relative_drift(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), DRIFT_FLOOR)


def invariants(state, prm):
    """(energy, momentum, masses) for either system's state."""
    if isinstance(state, State21):
        return (
            energy21(state, prm),
            momentum_h(state),
            (mass(state.u1), mass(state.u2)),
        )
    if isinstance(state, State12):
        return energy12(state, prm), momentum_g(state), (mass(state.u),)
    raise TypeError(f"unsupported state type {type(state)!r}")


def conserved_report(state, prm, reference=None) -> ConservedReport:
    """Evaluate invariants; drifts are measured against the reference triple."""
    e, h, q = invariants(state, prm)
    if reference is None:
        reference = (e, h, q)
    e0, h0, q0 = reference
    return ConservedReport(
        time=state.t,
        energy=e,
        momentum=h,
        masses=tuple(q),
        drift_energy=relative_drift(e, e0),
        drift_momentum=relative_drift(h, h0),
        drift_masses=tuple(relative_drift(a, b) for a, b in zip(q, q0)),
    )
