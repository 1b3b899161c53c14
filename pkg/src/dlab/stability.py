"""Orbital-stability experiments: perturb a minimizer, evolve, track orbit distance.

The minimizer set is approximated by the symmetry orbit of one computed
minimizer (a common translation of the triple plus one phase per envelope);
distances to that orbit upper-bound distances to the full minimizer set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conserved import conserved_report, invariants
from .evolve import IntegratorConfig, Status, integrate
from .model import Params21, Regime, State21, check_global_regime, ParameterError
from .spectral import COMPLEX, REAL, Field, Grid, h1_norm
from .varsolve import MinimizerResult


@dataclass(frozen=True)
class StabilityRecord:
    """Time series of modulated orbit distance and invariant drift for one run."""

    delta: float
    times: tuple
    distances: tuple
    drift_energy: float
    drift_momentum: float
    drift_masses: tuple
    verdict: str           # "Stable" or "Escaped"
    ratio: float           # max_t d(t) / delta (0 for delta = 0)
    t_escape: float | None
    status: str


def _h1_weights(grid: Grid):
    return grid.L * (1.0 + grid.k**2) / grid.N**2


def _triple_h1(grid: Grid, arrs) -> float:
    wgt = _h1_weights(grid)
    return float(sum(np.sqrt(np.sum(wgt * np.abs(np.fft.fft(a)) ** 2)) for a in arrs))


def orbit_distance(s: State21, ref: MinimizerResult) -> float:
    """H1 product-norm distance from s to the translation/phase orbit of ref.

    For each translation y the optimal phases are closed-form; y is found by a
    full cross-correlation scan over grid shifts followed by a local continuous
    refinement with exact spectral translation.
    """
    grid = s.grid
    wgt = _h1_weights(grid)
    su = (s.u1.values, s.u2.values, np.real(s.v.values))
    ru = (ref.phi1.values, ref.phi2.values, np.real(ref.w.values))
    s_hat = [np.fft.fft(a) for a in su]
    r_hat = [np.fft.fft(a) for a in ru]
    norms_s = [float(np.sum(wgt * np.abs(a) ** 2)) for a in s_hat]
    norms_r = [float(np.sum(wgt * np.abs(a) ** 2)) for a in r_hat]

    # coarse scan: inner products <s_i, T_y r_i>_H1 for every grid shift y,
    # all at once via one FFT per component
    phase_offset = np.exp(1j * grid.k * grid.L / 2.0)
    corr = [
        np.fft.fft(wgt * sh * np.conj(rh) * phase_offset)
        for sh, rh in zip(s_hat, r_hat)
    ]
    scan = (
        np.sqrt(np.maximum(norms_s[0] + norms_r[0] - 2 * np.abs(corr[0]), 0.0))
        + np.sqrt(np.maximum(norms_s[1] + norms_r[1] - 2 * np.abs(corr[1]), 0.0))
        + np.sqrt(np.maximum(norms_s[2] + norms_r[2] - 2 * np.real(corr[2]), 0.0))
    )
    best = int(np.argmin(scan))
    y0 = grid.x[best]

    def cost(y: float) -> float:
        # direct modulated difference: cancellation-free near exact matches
        shift = np.exp(1j * grid.k * y)
        total = 0.0
        for i, (sh, rh) in enumerate(zip(s_hat, r_hat)):
            rhs_shifted = rh * shift
            if i < 2:
                inner = np.sum(wgt * sh * np.conj(rhs_shifted))
                mag = abs(inner)
                phase = inner / mag if mag > 0 else 1.0
            else:
                phase = 1.0
            total += np.sqrt(np.sum(wgt * np.abs(sh - phase * rhs_shifted) ** 2))
        return float(total)

    # golden section: robust on the |y - y*|-kink the objective has at an
    # exact orbit match, where parabolic refinement stalls
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = y0 - grid.dx, y0 + grid.dx
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    c1, c2 = cost(x1), cost(x2)
    while hi - lo > 1e-12 * max(1.0, abs(y0)):
        if c1 <= c2:
            hi, x2, c2 = x2, x1, c1
            x1 = hi - invphi * (hi - lo)
            c1 = cost(x1)
        else:
            lo, x1, c1 = x1, x2, c2
            x2 = lo + invphi * (hi - lo)
            c2 = cost(x2)
    return float(min(c1, c2, cost(y0), cost(0.0)))


def perturb(ref: MinimizerResult, delta: float, seed: int) -> State21:
    """Reference state plus a reproducible band-limited random field of triple
    H1 size exactly delta (band |k| <= k_max/4)."""
    grid = ref.w.grid
    if delta < 0:
        raise ValueError("perturbation size must be nonnegative")
    base = (ref.phi1.values, ref.phi2.values, np.real(ref.w.values))
    if delta == 0.0:
        return State21(
            u1=Field(grid, base[0], COMPLEX),
            u2=Field(grid, base[1], COMPLEX),
            v=Field(grid, base[2], REAL),
            t=0.0,
        )
    rng = np.random.default_rng(seed)
    band = np.abs(grid.k) <= grid.k_max / 4.0

    def noise(real_kind: bool):
        coeffs = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
        vals = np.fft.ifft(band * coeffs)
        return np.real(vals) if real_kind else vals

    d1, d2, dv = noise(False), noise(False), noise(True)
    size = _triple_h1(grid, (d1, d2, dv))
    scale = delta / size
    return State21(
        u1=Field(grid, base[0] + scale * d1, COMPLEX),
        u2=Field(grid, base[1] + scale * d2, COMPLEX),
        v=Field(grid, base[2] + scale * dv, REAL),
        t=0.0,
    )


def stability_experiment(ref: MinimizerResult, delta: float, T: float,
                         prm: Params21, cfg: IntegratorConfig,
                         seed: int = 0,
                         escape_factor: float = 10.0) -> StabilityRecord:
    """Evolve a delta-perturbation of ref to time T, sampling orbit distance.

    Verdict is Stable when d(t) <= escape_factor * delta throughout (for
    delta = 0 an absolute floor replaces the threshold), else Escaped at the
    first crossing.  Requires globally-guaranteed parameters.
    """
    if check_global_regime(prm) is not Regime.GLOBAL_GUARANTEED:
        raise ParameterError(
            "stability experiments need the global regime "
            "(long-wave power in [1, 4/3), focusing envelope powers below 4)"
        )
    state0 = perturb(ref, delta, seed)
    ref_scale = _triple_h1(
        ref.w.grid, (ref.phi1.values, ref.phi2.values, np.real(ref.w.values))
    )
    threshold = escape_factor * delta if delta > 0 else 1e-6 * max(ref_scale, 1.0)

    traj = integrate(state0, prm, cfg, T)
    times, dists = [], []
    for st in traj.states:
        times.append(st.t)
        dists.append(orbit_distance(st, ref))

    verdict, t_escape = "Stable", None
    for t, d in zip(times, dists):
        if d > threshold:
            verdict, t_escape = "Escaped", t
            break
    last = traj.reports[-1]
    ratio = (max(dists) / delta) if delta > 0 else 0.0
    if traj.status is not Status.COMPLETED:
        verdict = "Escaped"
        t_escape = times[-1] if t_escape is None else t_escape
    return StabilityRecord(
        delta=delta,
        times=tuple(times),
        distances=tuple(dists),
        drift_energy=last.drift_energy,
        drift_momentum=last.drift_momentum,
        drift_masses=last.drift_masses,
        verdict=verdict,
        ratio=ratio,
        t_escape=t_escape,
        status=traj.status.value,
    )
