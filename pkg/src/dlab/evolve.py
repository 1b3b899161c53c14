"""Time integration via exact linear groups plus explicit nonlinear stages.

The default scheme changes variables through the exact Schroedinger/Airy groups and
applies classical RK4 to the transformed nonlinearity; with all nonlinear coefficients
zero one step reproduces the groups to round-off.  A Strang alternative (half linear,
explicit midpoint on the nonlinearity, half linear) is provided for cross-checks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .conserved import ConservedReport, conserved_report, invariants
from .model import (
    Params12,
    Params21,
    Regime,
    State12,
    State21,
    check_global_regime,
    rhs12_arrays,
    rhs21_arrays,
)
from .spectral import COMPLEX, REAL, Field, Grid, h1_norm


class Status(enum.Enum):
    COMPLETED = "Completed"
    BLOWUP_GUARD = "BlowupGuard"
    NAN_DETECTED = "NaNDetected"


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    scheme: str = "IFRK4"
    dealias: bool = True
    monitor_stride: int = 10
    max_h1: float | None = None

    def __post_init__(self):
        if self.dt == 0:
            raise ValueError("dt must be nonzero")
        if self.scheme not in ("IFRK4", "Strang"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.monitor_stride < 1:
            raise ValueError("monitor_stride must be a positive integer")


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list = field(default_factory=list)
    reports: list[ConservedReport] = field(default_factory=list)
    status: Status = Status.COMPLETED

    @property
    def final_state(self):
        return self.states[-1]


def nonlinear_frequency_estimate(state, prm) -> float:
    """Pointwise nonlinear frequency scale limiting the explicit step."""
    if isinstance(state, State21):
        g = state.grid
        u1, u2 = np.abs(state.u1.values), np.abs(state.u2.values)
        v = np.abs(np.real(state.v.values))
        w_u = max(
            np.max(abs(prm.gamma1) * u1**prm.q1 + abs(prm.alpha1) * v),
            np.max(abs(prm.gamma2) * u2**prm.q2 + abs(prm.alpha2) * v),
        )
        w_v = np.max(abs(prm.beta) * v ** float(prm.p)) * g.k_max \
            + 0.5 * max(abs(prm.alpha1) * np.max(u1) ** 2,
                        abs(prm.alpha2) * np.max(u2) ** 2) * g.k_max
        return float(max(w_u, w_v))
    g = state.grid
    u = np.abs(state.u.values)
    v1 = np.abs(np.real(state.v1.values))
    v2 = np.abs(np.real(state.v2.values))
    w_u = np.max(abs(prm.gamma) * u**prm.q + abs(prm.alpha1) * v1 + abs(prm.alpha2) * v2)
    w_v = max(
        np.max(abs(prm.beta1) * v1 ** float(prm.p1)),
        np.max(abs(prm.beta2) * v2 ** float(prm.p2)),
    ) * g.k_max + 0.5 * max(abs(prm.alpha1), abs(prm.alpha2)) * np.max(u) ** 2 * g.k_max
    return float(max(w_u, w_v))


def stable_dt_ceiling(state, prm) -> float:
    """The linear terms are integrated exactly; only the nonlinear scale limits dt."""
    return 0.5 / (1.0 + nonlinear_frequency_estimate(state, prm))


class _Work:
    """Raw-array integration core shared by both systems."""

    def __init__(self, state, prm, cfg: IntegratorConfig):
        self.grid: Grid = state.grid
        self.prm = prm
        self.cfg = cfg
        self.is21 = isinstance(state, State21)
        if self.is21:
            self.fields = [
                np.array(state.u1.values),
                np.array(state.u2.values),
                np.real(np.array(state.v.values)).astype(complex),
            ]
            self.n_complex = 2
        else:
            self.fields = [
                np.array(state.u.values),
                np.real(np.array(state.v1.values)).astype(complex),
                np.real(np.array(state.v2.values)).astype(complex),
            ]
            self.n_complex = 1
        self.t = state.t
        k = self.grid.k
        self.mult_s = lambda t: np.exp(-1j * k**2 * t)
        self.mult_a = lambda t: np.exp(1j * k**3 * t)

    def group(self, fields, t):
        ms, ma = self.mult_s(t), self.mult_a(t)
        out = []
        for i, f in enumerate(fields):
            m = ms if i < self.n_complex else ma
            out.append(np.fft.ifft(m * np.fft.fft(f)))
        return out

    def rhs(self, fields):
        if self.is21:
            d1, d2, dv = rhs21_arrays(
                fields[0], fields[1], np.real(fields[2]),
                self.grid, self.prm, self.cfg.dealias,
            )
            return [d1, d2, dv.astype(complex)]
        du, dv1, dv2 = rhs12_arrays(
            fields[0], np.real(fields[1]), np.real(fields[2]),
            self.grid, self.prm, self.cfg.dealias,
        )
        return [du, dv1.astype(complex), dv2.astype(complex)]

    def step_ifrk4(self):
        h = self.cfg.dt
        f0 = self.fields
        n1 = self.rhs(f0)
        v2 = self.group([f + 0.5 * h * d for f, d in zip(f0, n1)], h / 2)
        n2 = self.rhs(v2)
        e_half = self.group(f0, h / 2)
        n3 = self.rhs([f + 0.5 * h * d for f, d in zip(e_half, n2)])
        e_full = self.group(e_half, h / 2)
        n3_half = self.group(n3, h / 2)
        n4 = self.rhs([f + h * d for f, d in zip(e_full, n3_half)])
        n1_full = self.group(n1, h)
        n2_half = self.group(n2, h / 2)
        self.fields = [
            F + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for F, a, b, c, d in zip(e_full, n1_full, n2_half, n3_half, n4)
        ]
        self.t += h

    def step_strang(self):
        h = self.cfg.dt
        f = self.group(self.fields, h / 2)
        k1 = self.rhs(f)
        mid = [a + 0.5 * h * d for a, d in zip(f, k1)]
        k2 = self.rhs(mid)
        f = [a + h * d for a, d in zip(f, k2)]
        self.fields = self.group(f, h / 2)
        self.t += h

    def step(self):
        if self.cfg.scheme == "IFRK4":
            self.step_ifrk4()
        else:
            self.step_strang()

    def to_state(self):
        g = self.grid
        if self.is21:
            return State21(
                u1=Field(g, self.fields[0], COMPLEX),
                u2=Field(g, self.fields[1], COMPLEX),
                v=Field(g, np.real(self.fields[2]), REAL),
                t=self.t,
            )
        return State12(
            u=Field(g, self.fields[0], COMPLEX),
            v1=Field(g, np.real(self.fields[1]), REAL),
            v2=Field(g, np.real(self.fields[2]), REAL),
            t=self.t,
        )

    def h1_sum(self) -> float:
        k2 = 1.0 + self.grid.k**2
        scale = self.grid.L / self.grid.N**2
        total = 0.0
        for f in self.fields:
            total += np.sqrt(scale * np.sum(k2 * np.abs(np.fft.fft(f)) ** 2))
        return float(total)

    def has_nan(self) -> bool:
        return any(not np.all(np.isfinite(f.view(float))) for f in self.fields)


def step(state, prm, cfg: IntegratorConfig):
    """Advance one step of size cfg.dt; returns a new state."""
    work = _Work(state, prm, cfg)
    work.step()
    return work.to_state()


def integrate(state0, prm, cfg: IntegratorConfig, T: float,
              monitor=None) -> Trajectory:
    """Repeatedly step to time state0.t + T, monitoring every monitor_stride steps.

    Aborts with BlowupGuard once the summed H1 norms exceed max_h1 (default
    1000x the initial sum), or with NaNDetected on non-finite samples; the
    offending state is the last one recorded.
    """
    if T <= 0:
        raise ValueError("integration horizon T must be positive")
    ceiling = stable_dt_ceiling(state0, prm)
    if abs(cfg.dt) > ceiling:
        raise ValueError(
            f"dt = {abs(cfg.dt):.3g} exceeds the stable step ceiling "
            f"{ceiling:.3g} set by the nonlinear scale of the initial data"
        )
    work = _Work(state0, prm, cfg)
    n_steps = int(round(T / abs(cfg.dt)))
    max_h1 = cfg.max_h1 if cfg.max_h1 is not None else 1e3 * max(work.h1_sum(), 1e-12)

    traj = Trajectory()
    ref = invariants(state0, prm)

    def record():
        s = work.to_state()
        traj.times.append(work.t)
        traj.states.append(s)
        traj.reports.append(conserved_report(s, prm, ref))
        if monitor is not None:
            monitor(s)

    record()
    for i in range(1, n_steps + 1):
        work.step()
        if i % cfg.monitor_stride == 0 or i == n_steps:
            if work.has_nan():
                traj.status = Status.NAN_DETECTED
                record()
                return traj
            if work.h1_sum() > max_h1:
                traj.status = Status.BLOWUP_GUARD
                record()
                return traj
            record()
    traj.status = Status.COMPLETED
    return traj


_YOUNG_SPLIT = 12  # number of absorbed Young terms in the a-priori chain


def _young(M: float, theta: float, K: int = _YOUNG_SPLIT) -> float:
    """Constant C with M y^theta <= y/(2K) + C for y >= 0, 0 < theta < 1."""
    if M == 0.0:
        return 0.0
    return (1.0 - theta) * (M * (2.0 * K * theta) ** theta) ** (1.0 / (1.0 - theta))


def apriori_bound(s0: State21, prm: Params21) -> float:
    """Monotone a-priori ceiling on sum_j ||u_j||_H1^2 + ||v||_H1^2 along the flow.

    Composes the conservation laws with interpolation inequalities
    (||f||_inf^2 <= 2||f|| ||f'|| + ||f||^2/L and consequences), with every
    constant explicit; valid in the global regime only.
    """
    if check_global_regime(prm) is not Regime.GLOBAL_GUARANTEED:
        raise ValueError("a-priori bound is only available in the global regime")
    L = s0.grid.L
    n1, n2, n3 = h1_norm(s0.u1), h1_norm(s0.u2), h1_norm(s0.v)
    sup2 = 1.0 + 1.0 / L  # ||f||_inf^2 <= sup2 * ||f||_H1^2

    q_bar = (n1**2, n2**2)
    h_bar = n3**2 + 0.5 * (n1**2 + n2**2)
    p = float(prm.p)
    e_bar = n1**2 + n2**2 + n3**2 \
        + abs(prm.tau) * (sup2 * n3**2) ** (p / 2) * n3**2 \
        + abs(prm.alpha1) * n3 * np.sqrt(sup2) * n1**2 \
        + abs(prm.alpha2) * n3 * np.sqrt(sup2) * n2**2 \
        + abs(prm.tau1) * (sup2 * n1**2) ** (prm.q1 / 2) * n1**2 \
        + abs(prm.tau2) * (sup2 * n2**2) ** (prm.q2 / 2) * n2**2

    G = np.sqrt(q_bar[0]) + np.sqrt(q_bar[1])
    terms: list[tuple[float, float]] = []  # (M, theta) with contribution M y^theta
    const = e_bar

    # long-wave potential term |tau| ||v||_{p+2}^{p+2}
    th1 = (p + 4.0) / 4.0
    th2 = (p + 2.0) / 2.0
    c1 = abs(prm.tau) * 2 ** (p / 2) * 2**th1
    terms.append((c1 * h_bar**th1, p / 4.0))
    terms.append((c1 * G**th1, (3.0 * p + 4.0) / 8.0))
    c2 = abs(prm.tau) * L ** (-p / 2) * 2**th2
    const += c2 * h_bar**th2
    terms.append((c2 * G**th2, th2 / 2.0))

    # coupling terms |alpha_j| int |v| |u_j|^2
    for alpha, qb in ((prm.alpha1, q_bar[0]), (prm.alpha2, q_bar[1])):
        a = abs(alpha)
        terms.append((a * np.sqrt(2.0 * h_bar) * qb**0.75, 0.25))
        const += a * np.sqrt(h_bar) * qb / np.sqrt(L)
        terms.append((a * np.sqrt(2.0 * G) * qb**0.75, 0.5))
        terms.append((a * np.sqrt(G) * qb / np.sqrt(L), 0.25))

    # focusing envelope terms tau_j ||u_j||_{q_j+2}^{q_j+2} (only when focusing)
    for tau_j, q_j, qb in ((prm.tau1, prm.q1, q_bar[0]), (prm.tau2, prm.q2, q_bar[1])):
        if tau_j > 0:
            cu = tau_j * 2 ** (q_j / 2) * qb
            terms.append((cu * (2.0 * np.sqrt(qb)) ** (q_j / 2), q_j / 4.0))
            const += cu * (qb / L) ** (q_j / 2)

    y_star = 2.0 * (const + sum(_young(M, th) for M, th in terms))
    s_star = h_bar + G * np.sqrt(y_star)
    return float(y_star + q_bar[0] + q_bar[1] + s_star + 1.0)
