"""Constrained minimization defining normalized solitary waves.

Two variational problems are solved on the discrete torus:

* the three-sphere problem: minimize E over prescribed masses (r, l, m) by a
  projected (normalized) gradient flow with backtracking line search;
* the momentum-constrained problem: masses (r, l) plus translation momentum
  H = m, solved two independent ways - a scalar search over the long-wave mass
  A combined with the exact boost decomposition, and a direct projected flow
  on the full constraint manifold.

The boost decomposition uses the conserved momentum convention: a boost by
e^{ibx} changes H by -b(r+l), so the matching tilt for momentum m at long-wave
mass A is b(A) = (m - A)/(r + l), and the minimum satisfies
Lambda(r,l,m) = Theta(r,l,A*) + b(A*)^2 (r+l).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .conserved import energy21_arrays, momentum_h_arrays
from .model import ParameterError, Params21, signed_power_array
from .spectral import COMPLEX, REAL, Field, Grid, boost_phase
from .waves import (
    kdv_multiplier_for_mass,
    kdv_profile,
    nls_multiplier_for_mass,
    nls_profile,
)


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 50_000
    tol: float = 1e-8
    step0: float = 0.1
    sym_every: int = 0
    precondition: bool = True
    a_search_width: float = 1e-6


@dataclass(frozen=True)
class MinimizerResult:
    """Fields achieving the constrained minimum, with Lagrange multipliers.

    phi1/phi2/w are the achieving fields (boosted for the momentum-constrained
    problem); profile1/profile2 are the phase-aligned real envelope profiles
    satisfying the stationary system with (sigma1, sigma2, c).
    """

    phi1: Field
    phi2: Field
    w: Field
    value: float
    sigma1: float
    sigma2: float
    c: float
    r: float
    l: float
    m_or_a: float
    iterations: int
    grad_norm: float
    converged: bool
    boost_b: float = 0.0
    momentum: float | None = None
    profile1: Field | None = None
    profile2: Field | None = None

    @property
    def fields(self):
        return self.phi1, self.phi2, self.w

    @property
    def profile_fields(self):
        p1 = self.profile1 if self.profile1 is not None else self.phi1
        p2 = self.profile2 if self.profile2 is not None else self.phi2
        return p1, p2, self.w

    def summary_dict(self) -> dict:
        return {
            "value": self.value,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "c": self.c,
            "r": self.r,
            "l": self.l,
            "m_or_A": self.m_or_a,
            "converged": self.converged,
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# discrete energy, gradient, multipliers


def _norm2(grid: Grid, a) -> float:
    return float(np.sum(np.abs(a) ** 2)) * grid.dx


def _re_inner(grid: Grid, a, b) -> float:
    return float(np.real(np.sum(a * np.conj(b)))) * grid.dx


def _d2(grid: Grid, a):
    return np.fft.ifft(-grid.k**2 * np.fft.fft(a))


def gradient_arrays(f1, f2, w, grid: Grid, prm: Params21):
    """Exact gradient of the discrete energy (no dealiasing).

    g_j is the variation with respect to conj(phi_j); g_w the real variation.
    """
    g1 = -_d2(grid, f1) - prm.gamma1 * np.abs(f1) ** prm.q1 * f1 - prm.alpha1 * f1 * w
    g2 = -_d2(grid, f2) - prm.gamma2 * np.abs(f2) ** prm.q2 * f2 - prm.alpha2 * f2 * w
    gw = (
        -2.0 * np.real(_d2(grid, w))
        - (2.0 * prm.beta / float(prm.p + 1)) * signed_power_array(w, prm.p + 1)
        - prm.alpha1 * np.abs(f1) ** 2
        - prm.alpha2 * np.abs(f2) ** 2
    )
    return g1, g2, gw


def energy_gradient(fields, prm: Params21):
    """Public gradient on Field triples; see gradient_arrays."""
    phi1, phi2, w = fields
    grid = phi1.grid
    g1, g2, gw = gradient_arrays(phi1.values, phi2.values, np.real(w.values), grid, prm)
    return (
        Field(grid, g1, COMPLEX),
        Field(grid, g2, COMPLEX),
        Field(grid, gw, REAL),
    )


def energy_pairing(grads, directions, grid: Grid) -> float:
    """First-variation pairing: dE(h) = sum_j 2 Re<g_j, h_j> + <g_w, h_w>."""
    g1, g2, gw = (np.asarray(g.values if isinstance(g, Field) else g) for g in grads)
    h1, h2, hw = (np.asarray(h.values if isinstance(h, Field) else h) for h in directions)
    return (
        2.0 * _re_inner(grid, g1, h1)
        + 2.0 * _re_inner(grid, g2, h2)
        + _re_inner(grid, gw, np.real(hw))
    )


def extract_multipliers(fields, prm: Params21):
    """Lagrange multipliers from near-stationary fields.

    sigma_j = -Re<g_j, phi_j>/||phi_j||^2,  c = -<g_w, w>/(2||w||^2).
    """
    phi1, phi2, w = fields
    grid = phi1.grid
    f1, f2, wv = phi1.values, phi2.values, np.real(w.values)
    r, l, m = _norm2(grid, f1), _norm2(grid, f2), _norm2(grid, wv)
    if min(r, l, m) <= 0.0:
        raise ValueError("cannot extract a multiplier for a zero-mass component")
    g1, g2, gw = gradient_arrays(f1, f2, wv, grid, prm)
    sigma1 = -_re_inner(grid, g1, f1) / r
    sigma2 = -_re_inner(grid, g2, f2) / l
    c = -_re_inner(grid, gw, wv) / (2.0 * m)
    return sigma1, sigma2, c


def boost(fields, b: float):
    """Multiply the envelope components by the periodic phase of mean slope b.

    Masses are unchanged; the momentum H changes by -b(r+l).
    """
    phi1, phi2, w = fields
    grid = phi1.grid
    phase = boost_phase(grid, b)
    return (
        Field(grid, phase * phi1.values, COMPLEX),
        Field(grid, phase * phi2.values, COMPLEX),
        w,
    )


# ---------------------------------------------------------------------------
# rearrangement


def rearrange(f: Field) -> Field:
    """Symmetric decreasing rearrangement of the samples (a permutation).

    The largest sample is placed at x = 0 and successive ones alternate sides,
    so the output is even on the circle and nonincreasing away from the center.
    Negative inputs are replaced by their modulus first.
    """
    grid = f.grid
    vals = np.real(f.values)
    if np.any(vals < 0):
        vals = np.abs(vals)
    order = np.sort(vals)[::-1]
    n = grid.N
    out = np.empty(n)
    center = n // 2
    idx = np.empty(n, dtype=int)
    idx[0] = center
    ranks = np.arange(1, n)
    offsets = (ranks + 1) // 2
    signs = np.where(ranks % 2 == 1, 1, -1)
    idx[1:] = (center + signs * offsets) % n
    out[idx] = order
    return Field(grid, out, REAL)


# ---------------------------------------------------------------------------
# three-sphere flow


def _precondition(grid: Grid, arr, weight: float = 1.0):
    return np.fft.ifft(np.fft.fft(arr) / (weight * (1.0 + grid.k**2)))


def _rescale(grid: Grid, arr, target: float):
    m = _norm2(grid, arr)
    if m <= 0.0:
        raise RuntimeError("component collapsed to zero during projection")
    return arr * np.sqrt(target / m)


def _default_profile(grid: Grid, decay: float = 0.25):
    return np.exp(-decay * grid.x**2)


def _initial_triple(r, l, m, prm: Params21, grid: Grid):
    def envelope(q, gamma, target):
        if target == 0.0:
            return np.zeros(grid.N, dtype=complex)
        if gamma > 0:
            tau = gamma / (q + 2.0)
            lam = nls_multiplier_for_mass(q, tau, target, grid)
            vals = nls_profile(q, tau, lam, grid).values.astype(complex)
        else:
            vals = _default_profile(grid).astype(complex)
        return _rescale(grid, vals, target)

    def longwave(target):
        if target == 0.0:
            return np.zeros(grid.N)
        if prm.beta > 0:
            lam3 = kdv_multiplier_for_mass(prm.p, prm.beta, target, grid)
            vals = np.real(kdv_profile(prm.p, prm.beta, lam3, grid).values)
        else:
            vals = _default_profile(grid)
        return np.real(_rescale(grid, vals, target))

    return envelope(prm.q1, prm.gamma1, r), envelope(prm.q2, prm.gamma2, l), longwave(m)


def _check_hypotheses(r, l, m, prm: Params21):
    if min(r, l, m) < 0:
        raise ValueError("constraint masses must be nonnegative")
    if prm.alpha1 < 0 or prm.alpha2 < 0:
        raise ParameterError("couplings alpha_j must be nonnegative")
    if prm.gamma1 < 0 or prm.gamma2 < 0:
        raise ParameterError("focusing coefficients gamma_j must be nonnegative")
    if (r > 0 and prm.q1 >= 4) or (l > 0 and prm.q2 >= 4):
        raise ParameterError("envelope powers must satisfy q_j < 4")
    if m > 0 and prm.p >= 4:
        raise ParameterError("long-wave power must satisfy p < 4")
    if m > 0 and prm.beta <= 0 and prm.alpha1 <= 0 and prm.alpha2 <= 0:
        raise ParameterError("the long-wave component needs beta > 0 or a coupling")
    if r > 0 and prm.gamma1 <= 0 and prm.alpha1 <= 0:
        raise ParameterError("component 1 needs gamma1 > 0 or alpha1 > 0")
    if l > 0 and prm.gamma2 <= 0 and prm.alpha2 <= 0:
        raise ParameterError("component 2 needs gamma2 > 0 or alpha2 > 0")


def _recenter_and_align(f1, f2, w, grid: Grid):
    anchor = w if _norm2(grid, w) > 0 else np.abs(f1)
    shift = grid.N // 2 - int(np.argmax(np.real(anchor)))
    f1, f2, w = (np.roll(a, shift) for a in (f1, f2, w))
    out = []
    for f in (f1, f2):
        if np.max(np.abs(f)) > 0:
            peak = np.argmax(np.abs(f))
            f = f * np.exp(-1j * np.angle(f[peak]))
        out.append(f)
    return out[0], out[1], np.real(w)


def theta_minimize(r: float, l: float, m: float, prm: Params21, grid: Grid,
                   opts: SolverOptions = SolverOptions(),
                   init_fields=None, trace: list | None = None) -> MinimizerResult:
    """Minimize the energy over the product of three mass spheres.

    Normalized gradient flow: step against the (optionally Sobolev-
    preconditioned) projected gradient, rescale every component back to its
    sphere, and backtrack the step until the energy decreases.  When given,
    `trace` collects the accepted energy value of every iteration.
    """
    _check_hypotheses(r, l, m, prm)
    if init_fields is not None:
        f1, f2 = (np.array(a, dtype=complex) for a in init_fields[:2])
        w = np.real(np.array(init_fields[2]))
        f1 = _rescale(grid, f1, r) if r > 0 else np.zeros(grid.N, complex)
        f2 = _rescale(grid, f2, l) if l > 0 else np.zeros(grid.N, complex)
        w = np.real(_rescale(grid, w, m)) if m > 0 else np.zeros(grid.N)
    else:
        f1, f2, w = _initial_triple(r, l, m, prm, grid)

    energy = lambda a, b, c: energy21_arrays(a, b, c, grid, prm)
    e_cur = energy(f1, f2, w)
    iterations = 0
    converged = False
    grad_norm = np.inf

    for it in range(opts.max_iters):
        iterations = it + 1
        g1, g2, gw = gradient_arrays(f1, f2, w, grid, prm)
        pg1 = g1 + (-_re_inner(grid, g1, f1) / r) * f1 if r > 0 else np.zeros_like(g1)
        pg2 = g2 + (-_re_inner(grid, g2, f2) / l) * f2 if l > 0 else np.zeros_like(g2)
        pgw = gw + (-_re_inner(grid, gw, w) / m) * w if m > 0 else np.zeros_like(gw)
        grad_norm = np.sqrt(
            _norm2(grid, pg1) + _norm2(grid, pg2) + _norm2(grid, pgw)
        )
        if grad_norm <= opts.tol:
            converged = True
            break

        if opts.precondition:
            d1 = _precondition(grid, pg1)
            d2 = _precondition(grid, pg2)
            dw = np.real(_precondition(grid, pgw, weight=2.0))
        else:
            d1, d2, dw = pg1, pg2, np.real(pgw)

        # strict descent up to energy-evaluation round-off
        slack = 4e-16 * (1.0 + abs(e_cur))
        eta = opts.step0
        accepted = False
        for _ in range(60):
            t1 = _rescale(grid, f1 - eta * d1, r) if r > 0 else f1
            t2 = _rescale(grid, f2 - eta * d2, l) if l > 0 else f2
            tw = np.real(_rescale(grid, w - eta * dw, m)) if m > 0 else w
            e_new = energy(t1, t2, tw)
            if e_new < e_cur + slack:
                f1, f2, w, e_cur = t1, t2, tw, e_new
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        if trace is not None:
            trace.append(e_cur)

        if opts.sym_every and (it + 1) % opts.sym_every == 0:
            s1 = rearrange(Field(grid, f1, REAL)).values if r > 0 else f1
            s2 = rearrange(Field(grid, f2, REAL)).values if l > 0 else f2
            sw = np.real(rearrange(Field(grid, w, REAL)).values) if m > 0 else w
            e_sym = energy(s1, s2, sw)
            if e_sym <= e_cur:
                f1, f2, w, e_cur = s1.astype(complex), s2.astype(complex), sw, e_sym

    f1, f2, w = _recenter_and_align(f1, f2, w, grid)
    e_cur = energy(f1, f2, w)

    g1, g2, gw = gradient_arrays(f1, f2, w, grid, prm)
    sigma1 = -_re_inner(grid, g1, f1) / r if r > 0 else 0.0
    sigma2 = -_re_inner(grid, g2, f2) / l if l > 0 else 0.0
    c = -_re_inner(grid, gw, w) / (2.0 * m) if m > 0 else 0.0

    phi1 = Field(grid, f1, COMPLEX)
    phi2 = Field(grid, f2, COMPLEX)
    wf = Field(grid, w, REAL)
    return MinimizerResult(
        phi1=phi1, phi2=phi2, w=wf, value=e_cur,
        sigma1=sigma1, sigma2=sigma2, c=c,
        r=r, l=l, m_or_a=m,
        iterations=iterations, grad_norm=float(grad_norm), converged=converged,
        profile1=phi1, profile2=phi2,
    )


def suggest_grid(r: float, l: float, m: float, prm: Params21,
                 pilot_grid: Grid | None = None, n_points: int = 512) -> Grid:
    """Domain sized so solitary tails decay well below 1 but stay above
    round-off noise: a pilot solve estimates the multipliers and the length is
    set from the fastest decay rate (sqrt of the largest multiplier)."""
    from .spectral import make_grid

    pilot_grid = pilot_grid or make_grid(80.0, 256)
    pilot = theta_minimize(r, l, m, prm, pilot_grid,
                           SolverOptions(tol=1e-6, max_iters=20_000))
    rates = [s for s in (pilot.sigma1, pilot.sigma2, pilot.c) if s > 0]
    sig_max = max(rates) if rates else 1.0
    L = float(np.clip(60.0 / np.sqrt(sig_max), 30.0, 160.0))
    return make_grid(L, n_points)


# ---------------------------------------------------------------------------
# momentum-constrained problem: boost decomposition route


def boost_tilt(r: float, l: float, m: float, a_mass: float) -> float:
    """Tilt b with H(boosted by -b) = m when the long-wave mass is a_mass."""
    return (m - a_mass) / (r + l)


def lambda_minimize(r: float, l: float, m: float, prm: Params21, grid: Grid,
                    opts: SolverOptions = SolverOptions()) -> MinimizerResult:
    """Golden-section search over the long-wave mass A of
    Theta(r,l,A) + b(A)^2 (r+l), assembling the minimizer by the inverse boost."""
    if r <= 0 or l <= 0:
        raise ValueError("envelope masses r, l must be positive")
    hi = m + 10.0 * (r + l) if m > 0 else 10.0 * (r + l)
    lo = 0.0

    cache: dict[float, MinimizerResult] = {}
    warm = {"fields": None}

    def theta_at(a_mass: float) -> MinimizerResult:
        if a_mass in cache:
            return cache[a_mass]
        res = theta_minimize(r, l, a_mass, prm, grid, opts,
                             init_fields=warm["fields"])
        warm["fields"] = (res.phi1.values, res.phi2.values, np.real(res.w.values))
        cache[a_mass] = res
        return res

    def objective(a_mass: float) -> float:
        b = boost_tilt(r, l, m, a_mass)
        return theta_at(a_mass).value + b * b * (r + l)

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b_hi = lo, hi
    x1 = b_hi - invphi * (b_hi - a)
    x2 = a + invphi * (b_hi - a)
    f1v, f2v = objective(x1), objective(x2)
    while b_hi - a > opts.a_search_width:
        if f1v <= f2v:
            b_hi, x2, f2v = x2, x1, f1v
            x1 = b_hi - invphi * (b_hi - a)
            f1v = objective(x1)
        else:
            a, x1, f1v = x1, x2, f2v
            x2 = a + invphi * (b_hi - a)
            f2v = objective(x2)
    a_star = x1 if f1v <= f2v else x2
    theta_res = theta_at(a_star)
    b_star = boost_tilt(r, l, m, a_star)
    if hi - a_star < 10 * opts.a_search_width:
        warnings.warn("optimal long-wave mass sits at the search-interval boundary")

    bphi1, bphi2, bw = boost(theta_res.fields, -b_star)
    value = theta_res.value + b_star**2 * (r + l)
    return replace(
        theta_res,
        phi1=bphi1, phi2=bphi2, w=bw,
        value=value,
        m_or_a=a_star,
        boost_b=-b_star,
        momentum=m,
        profile1=theta_res.phi1, profile2=theta_res.phi2,
    )


# ---------------------------------------------------------------------------
# momentum-constrained problem: direct projected flow (independent route)


def _project_constraints(grid: Grid, fields, grads):
    """Remove the constraint-gradient components from the energy gradient."""
    f1, f2, w = fields
    g1, g2, gw = grads

    def dxa(a):
        return np.fft.ifft(1j * grid.k * np.fft.fft(a))

    basis = [
        (f1, np.zeros_like(f2), np.zeros(grid.N)),
        (np.zeros_like(f1), f2, np.zeros(grid.N)),
        (1j * dxa(f1), 1j * dxa(f2), 2.0 * w),
    ]

    def pair(a, b):
        return (
            2.0 * _re_inner(grid, a[0], b[0])
            + 2.0 * _re_inner(grid, a[1], b[1])
            + _re_inner(grid, a[2], np.real(b[2]))
        )

    gram = np.array([[pair(x, y) for y in basis] for x in basis])
    rhs = np.array([pair(grads, x) for x in basis])
    lam = np.linalg.solve(gram + 1e-14 * np.eye(3), rhs)
    p1 = g1 - sum(lam[i] * basis[i][0] for i in range(3))
    p2 = g2 - sum(lam[i] * basis[i][1] for i in range(3))
    pw = np.real(gw) - sum(lam[i] * np.real(basis[i][2]) for i in range(3))
    return (p1, p2, pw), lam


def lambda_direct(r: float, l: float, m: float, prm: Params21, grid: Grid,
                  opts: SolverOptions = SolverOptions()) -> MinimizerResult:
    """Direct projected-gradient minimization on {Q1 = r, Q2 = l, H = m}.

    Independent of the boost-decomposition route: feasibility is restored each
    step by mass rescaling plus an exact momentum-fixing boost.
    """
    if r <= 0 or l <= 0:
        raise ValueError("envelope masses r, l must be positive")
    a0 = max(m, 0.5 * (r + l))
    f1, f2, w = _initial_triple(r, l, a0, prm, grid)

    def retract(a1, a2, aw):
        a1 = _rescale(grid, a1, r)
        a2 = _rescale(grid, a2, l)
        h = momentum_h_arrays(a1, a2, aw, grid)
        phase = boost_phase(grid, (h - m) / (r + l))
        return a1 * phase, a2 * phase, np.real(aw)

    f1, f2, w = retract(f1, f2, w)
    energy = lambda a, b, c: energy21_arrays(a, b, c, grid, prm)
    e_cur = energy(f1, f2, w)
    converged = False
    grad_norm = np.inf
    iterations = 0

    for it in range(opts.max_iters):
        iterations = it + 1
        grads = gradient_arrays(f1, f2, w, grid, prm)
        (p1, p2, pw), _ = _project_constraints(grid, (f1, f2, w), grads)
        grad_norm = np.sqrt(_norm2(grid, p1) + _norm2(grid, p2) + _norm2(grid, pw))
        if grad_norm <= opts.tol:
            converged = True
            break
        if opts.precondition:
            d1 = _precondition(grid, p1)
            d2 = _precondition(grid, p2)
            dw = np.real(_precondition(grid, pw, weight=2.0))
        else:
            d1, d2, dw = p1, p2, pw
        slack = 4e-16 * (1.0 + abs(e_cur))
        eta = opts.step0
        accepted = False
        for _ in range(60):
            t1, t2, tw = retract(f1 - eta * d1, f2 - eta * d2, w - eta * dw)
            e_new = energy(t1, t2, tw)
            if e_new < e_cur + slack:
                f1, f2, w, e_cur = t1, t2, tw, e_new
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break

    a_mass = _norm2(grid, w)
    b_applied = (a_mass - m) / (r + l)
    unboost = boost_phase(grid, -b_applied)
    pf1, pf2, pw_ = _recenter_and_align(f1 * unboost, f2 * unboost, w, grid)
    sigma1, sigma2, c = extract_multipliers(
        (Field(grid, pf1, COMPLEX), Field(grid, pf2, COMPLEX), Field(grid, pw_, REAL)),
        prm,
    )
    return MinimizerResult(
        phi1=Field(grid, f1, COMPLEX),
        phi2=Field(grid, f2, COMPLEX),
        w=Field(grid, w, REAL),
        value=e_cur,
        sigma1=sigma1, sigma2=sigma2, c=c,
        r=r, l=l, m_or_a=a_mass,
        iterations=iterations, grad_norm=float(grad_norm), converged=converged,
        boost_b=b_applied, momentum=m,
        profile1=Field(grid, pf1, COMPLEX),
        profile2=Field(grid, pf2, COMPLEX),
    )


# ---------------------------------------------------------------------------
# subadditivity diagnostic


@dataclass(frozen=True)
class SubadditivityReport:
    total_masses: tuple
    value_total: float
    part_values: tuple
    margin: float
    skipped_parts: tuple
    all_converged: bool


def subadditivity_check(splits, prm: Params21, grid: Grid,
                        opts: SolverOptions = SolverOptions()) -> SubadditivityReport:
    """Margin Theta(sum) - sum_i Theta(part_i); strictly negative in theory.

    Parts with all-zero masses contribute nothing and are reported as skipped.
    """
    totals = tuple(float(sum(s[i] for s in splits)) for i in range(3))
    if sum(totals) <= 0:
        raise ValueError("component sums must be positive")
    total_res = theta_minimize(*totals, prm, grid, opts)
    part_values = []
    skipped = []
    all_conv = total_res.converged
    for i, part in enumerate(splits):
        if sum(part) == 0:
            skipped.append(i)
            continue
        res = theta_minimize(float(part[0]), float(part[1]), float(part[2]),
                             prm, grid, opts)
        part_values.append(res.value)
        all_conv = all_conv and res.converged
    margin = total_res.value - sum(part_values)
    return SubadditivityReport(
        total_masses=totals,
        value_total=total_res.value,
        part_values=tuple(part_values),
        margin=margin,
        skipped_parts=tuple(skipped),
        all_converged=all_conv,
    )
