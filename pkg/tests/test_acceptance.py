"""Acceptance suite: every numbered criterion prints one PASS line at its
stated tolerance.  Run with `pytest tests/test_acceptance.py -v -s`."""

import hashlib
import json
import time

import numpy as np
import pytest

from dlab.conserved import energy21_arrays, mass, momentum_h
from dlab.evolve import IntegratorConfig, Status, apriori_bound, integrate, step
from dlab.model import Params12, Params21, Regime, State12, State21, check_global_regime
from dlab.runner import run
from dlab.config import parse_config
from dlab.spectral import (
    COMPLEX,
    REAL,
    Field,
    apply_airy_group,
    apply_schrodinger_group,
    h1_norm,
    make_grid,
    translate,
)
from dlab.stability import stability_experiment
from dlab.varsolve import (
    SolverOptions,
    energy_gradient,
    energy_pairing,
    lambda_direct,
    lambda_minimize,
    suggest_grid,
    theta_minimize,
)
from dlab.waves import (
    WaveParams,
    assemble_traveling,
    kdv_multiplier_for_mass,
    kdv_profile,
    nls_multiplier_for_mass,
    nls_profile,
    profile_residual,
)

REF_PARAMS = Params21(alpha1=1.0, alpha2=1.0, gamma1=1.0, gamma2=1.0,
                      beta=1.0, q1=2.0, q2=2.0, p=1)


def report(criterion: int, passed: bool, detail: str):
    print(f"\nACCEPTANCE {criterion:2d}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, detail


def zero(grid, kind=COMPLEX):
    return Field(grid, np.zeros(grid.N), kind)


def smooth21(grid, seed, amp=0.5):
    rng = np.random.default_rng(seed)
    band = np.abs(grid.k) <= grid.k_max / 6

    def f(complex_kind):
        c = np.zeros(grid.N, dtype=complex)
        c[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
        vals = amp * np.fft.ifft(c * grid.N) / np.sqrt(band.sum())
        return vals if complex_kind else np.real(vals)

    return State21(u1=Field(grid, f(True), COMPLEX),
                   u2=Field(grid, f(True), COMPLEX),
                   v=Field(grid, f(False), REAL))


# ---------------------------------------------------------------------------
# shared expensive artifacts


@pytest.fixture(scope="module")
def work_grid():
    return make_grid(80.0, 256)


@pytest.fixture(scope="module")
def theta_corner_results():
    """theta_minimize over {0.5, 1, 2}^3 on per-point grids."""
    out = {}
    pilot = make_grid(80.0, 256)
    for r in (0.5, 1.0, 2.0):
        for l in (0.5, 1.0, 2.0):
            for m in (0.5, 1.0, 2.0):
                grid = suggest_grid(r, l, m, REF_PARAMS, pilot)
                out[(r, l, m)] = theta_minimize(r, l, m, REF_PARAMS, grid)
    return out


@pytest.fixture(scope="module")
def lambda_results(work_grid):
    out = {}
    for m in (1.0, -1.0):
        res_a = lambda_minimize(1.0, 1.0, m, REF_PARAMS, work_grid)
        res_b = lambda_direct(1.0, 1.0, m, REF_PARAMS, work_grid,
                              SolverOptions(tol=3e-7))
        out[m] = (res_a, res_b)
    return out


@pytest.fixture(scope="module")
def decoupled_result(work_grid):
    prm = Params21(alpha1=0.0, alpha2=0.0)
    started = time.monotonic()
    res = theta_minimize(1.0, 1.0, 1.0, prm, work_grid)
    return res, time.monotonic() - started, prm


@pytest.fixture(scope="module")
def stability_records(work_grid):
    ref = lambda_minimize(1.0, 1.0, 1.0, REF_PARAMS, work_grid)
    cfg = IntegratorConfig(dt=5e-3, monitor_stride=40)
    return {
        d: stability_experiment(ref, d, 20.0, REF_PARAMS, cfg, seed=11)
        for d in (1e-3, 2e-3)
    }


# ---------------------------------------------------------------------------
# criteria


def test_01_linear_limit_exactness():
    grid = make_grid(80.0, 512)
    prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=0)
    s = smooth21(grid, 0)
    dt = 0.05
    started = time.monotonic()
    out = step(s, prm, IntegratorConfig(dt=dt))
    elapsed = time.monotonic() - started
    exact = (apply_schrodinger_group(s.u1, dt),
             apply_schrodinger_group(s.u2, dt),
             apply_airy_group(s.v, dt))
    err = max(np.max(np.abs(g.values - w.values))
              for g, w in zip((out.u1, out.u2, out.v), exact))
    report(1, err <= 1e-12 and elapsed < 1.0,
           f"one step vs exact groups: Linf {err:.2e} (<=1e-12), "
           f"runtime {elapsed:.3f}s (<1s) at N=512")


def test_02_kdv_soliton_transport():
    grid = make_grid(80.0, 512)
    prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=1.0, p=1)
    w0 = kdv_profile(1, 1.0, 1.0, grid)
    s0 = State21(u1=zero(grid), u2=zero(grid), v=w0)
    exact = translate(w0, -1.0).values
    errs = {}
    for dt in (4e-3, 2e-3, 1e-3):
        traj = integrate(s0, prm, IntegratorConfig(dt=dt, monitor_stride=10**9), 1.0)
        errs[dt] = np.max(np.abs(traj.final_state.v.values - exact))
    slope = np.log(errs[4e-3] / errs[1e-3]) / np.log(4.0)
    ok = errs[1e-3] <= 1e-6 and abs(slope - 4.0) <= 0.3
    report(2, ok,
           f"T=1 soliton transport: Linf {errs[1e-3]:.2e} (<=1e-6), "
           f"convergence slope {slope:.2f} (4.0 +/- 0.3)")


def test_03_conservation_drift():
    # 2+1 system: decoupled solitary triple assembled as one traveling state
    grid = make_grid(80.0, 256)
    c = 4 * np.pi * 7 / grid.L
    phi1 = nls_profile(2.0, 0.25, 0.5, grid)
    phi2 = nls_profile(2.0, 0.25, 0.4, grid)
    w = kdv_profile(1, 1.0, c, grid)
    s0 = assemble_traveling(phi1, phi2, w,
                            WaveParams.from_multipliers(0.5, 0.4, c), 0.0)
    traj = integrate(s0, REF_PARAMS, IntegratorConfig(dt=1e-3, monitor_stride=500),
                     10.0)
    last = traj.reports[-1]
    drift21 = max(last.drift_energy, last.drift_momentum, *last.drift_masses)

    prm12 = Params12(alpha1=1.0, alpha2=1.0, gamma=1.0, q=2.0,
                     beta1=1.0, beta2=1.0, p1=1, p2=1)
    u = nls_profile(2.0, 0.25, 0.5, grid)
    s12 = State12(u=Field(grid, u.values, COMPLEX),
                  v1=kdv_profile(1, 1.0, 0.6, grid),
                  v2=translate(kdv_profile(1, 1.0, 0.8, grid), 10.0))
    traj12 = integrate(s12, prm12, IntegratorConfig(dt=1e-3, monitor_stride=500),
                       10.0)
    last12 = traj12.reports[-1]
    drift12 = max(last12.drift_energy, last12.drift_momentum, *last12.drift_masses)
    ok = drift21 <= 1e-6 and drift12 <= 1e-6
    report(3, ok,
           f"T=10 coupled drifts: 2+1 max {drift21:.2e}, 1+2 max {drift12:.2e} "
           f"(each <=1e-6)")


def test_04_gradient_correctness():
    grid = make_grid(40.0, 128)
    prm = REF_PARAMS
    ratios = []
    for seed in range(20):
        rng = np.random.default_rng(200 + seed)
        band = np.abs(grid.k) <= grid.k_max / 6

        def f(complex_kind):
            c = np.zeros(grid.N, dtype=complex)
            c[band] = rng.standard_normal(band.sum()) \
                + 1j * rng.standard_normal(band.sum())
            vals = 0.6 * np.fft.ifft(c * grid.N) / np.sqrt(band.sum())
            return vals if complex_kind else np.real(vals)

        f1, f2, w = f(True), f(True), f(False)
        h1, h2, hw = f(True), f(True), f(False)
        grads = energy_gradient(
            (Field(grid, f1, COMPLEX), Field(grid, f2, COMPLEX),
             Field(grid, w, REAL)), prm)
        pairing = energy_pairing(grads, (h1, h2, hw), grid)

        def e_at(eps):
            return energy21_arrays(f1 + eps * h1, f2 + eps * h2, w + eps * hw,
                                   grid, prm)

        err = {eps: abs(pairing - (e_at(eps) - e_at(-eps)) / (2 * eps))
               for eps in (1e-3, 1e-4)}
        ratios.append(err[1e-3] / max(err[1e-4], 1e-18))
    ok = all(100.0 / 3.0 <= r <= 300.0 for r in ratios)
    report(4, ok,
           f"20 random states: FD error ratios in [{min(ratios):.1f}, "
           f"{max(ratios):.1f}] (O(eps^2) band [33.3, 300])")


def test_05_decoupled_minimizer_oracle(decoupled_result, work_grid):
    res, elapsed, prm = decoupled_result
    grid = work_grid
    tau = prm.gamma1 / (prm.q1 + 2.0)
    lam = nls_multiplier_for_mass(prm.q1, tau, 1.0, grid)
    lam3 = kdv_multiplier_for_mass(prm.p, prm.beta, 1.0, grid)
    psi = nls_profile(prm.q1, tau, lam, grid)
    w = kdv_profile(prm.p, prm.beta, lam3, grid)
    l2_u = np.sqrt(np.sum(np.abs(res.phi1.values - psi.values) ** 2) * grid.dx)
    l2_w = np.sqrt(np.sum((np.real(res.w.values) - np.real(w.values)) ** 2)
                   * grid.dx)
    mult_err = max(abs(res.sigma1 - lam), abs(res.sigma2 - lam),
                   abs(res.c - lam3))
    ok = (res.converged and max(l2_u, l2_w) <= 1e-4 and mult_err <= 1e-6
          and elapsed < 60.0)
    report(5, ok,
           f"decoupled recovery: L2 errors ({l2_u:.1e}, {l2_w:.1e}) <=1e-4, "
           f"multiplier error {mult_err:.1e} <=1e-6, runtime {elapsed:.1f}s (<60s)")


def test_06_negativity_and_positivity(theta_corner_results):
    worst = {"value": -np.inf, "min_w": np.inf, "sigma": np.inf}
    all_ok = True
    for (r, l, m), res in theta_corner_results.items():
        min_w = float(np.min(np.real(res.w.values)))
        ok = (res.converged and res.value < 0 and min_w > 0
              and res.sigma1 > 0 and res.sigma2 > 0)
        all_ok = all_ok and ok
        worst["value"] = max(worst["value"], res.value)
        worst["min_w"] = min(worst["min_w"], min_w)
        worst["sigma"] = min(worst["sigma"], res.sigma1, res.sigma2)
    report(6, all_ok,
           f"27 mass corners: max value {worst['value']:.2e} (<0), "
           f"min tail {worst['min_w']:.1e} (>0), min sigma {worst['sigma']:.3f} (>0)")


def test_07_subadditivity_margin(theta_corner_results):
    big = theta_corner_results[(2.0, 2.0, 2.0)]
    small = theta_corner_results[(1.0, 1.0, 1.0)]
    margin = big.value - 2.0 * small.value
    report(7, margin < -1e-4,
           f"Theta(2,2,2) - 2 Theta(1,1,1) = {margin:.4f} (< -1e-4)")


def test_08_boost_decomposition_consistency(lambda_results):
    details = []
    ok = True
    for m, (res_a, res_b) in lambda_results.items():
        rel = abs(res_a.value - res_b.value) / abs(res_a.value)
        constraint_err = 0.0
        for res in (res_a, res_b):
            s = State21(u1=res.phi1, u2=res.phi2, v=res.w)
            constraint_err = max(
                constraint_err,
                abs(mass(res.phi1) - 1.0), abs(mass(res.phi2) - 1.0),
                abs(momentum_h(s) - m),
            )
        ok = ok and rel <= 1e-4 and constraint_err <= 1e-6
        details.append(f"m={m:+.0f}: rel {rel:.1e}, constraints {constraint_err:.1e}")
    report(8, ok, "two solver routes agree (<=1e-4), constraints met (<=1e-6): "
           + "; ".join(details))


def test_09_profile_residuals(theta_corner_results, lambda_results,
                              decoupled_result):
    worst = 0.0
    checked = 0
    for res in theta_corner_results.values():
        worst = max(worst, profile_residual(*res.profile_fields, res.sigma1,
                                            res.sigma2, res.c, REF_PARAMS))
        checked += 1
    for res_a, _ in lambda_results.values():
        worst = max(worst, profile_residual(*res_a.profile_fields, res_a.sigma1,
                                            res_a.sigma2, res_a.c, REF_PARAMS))
        checked += 1
    res, _, prm = decoupled_result
    worst = max(worst, profile_residual(*res.profile_fields, res.sigma1,
                                        res.sigma2, res.c, prm))
    checked += 1
    report(9, worst <= 1e-5,
           f"{checked} converged minimizers: worst stationary residual "
           f"{worst:.1e} (<=1e-5)")


def test_10_orbital_stability(stability_records):
    r1, r2 = stability_records[1e-3], stability_records[2e-3]
    ratio_spread = max(r1.ratio, r2.ratio) / min(r1.ratio, r2.ratio)
    ok = (r1.verdict == "Stable" and r2.verdict == "Stable"
          and r1.ratio <= 10.0 and r2.ratio <= 10.0 and ratio_spread < 2.0)
    report(10, ok,
           f"T=20 runs: ratios {r1.ratio:.2f}, {r2.ratio:.2f} (<=10), "
           f"spread {ratio_spread:.2f} (<2)")


def test_11_apriori_boundedness():
    grid = make_grid(40.0, 256)
    ok = True
    margins = []
    for seed in range(10):
        rng = np.random.default_rng(300 + seed)
        prm = Params21(
            alpha1=rng.uniform(0.3, 1.5), alpha2=rng.uniform(0.3, 1.5),
            gamma1=rng.uniform(0.3, 1.5), gamma2=rng.uniform(0.3, 1.5),
            beta=rng.uniform(0.3, 1.5),
            q1=rng.uniform(1.0, 3.0), q2=rng.uniform(1.0, 3.0), p=1,
        )
        assert check_global_regime(prm) is Regime.GLOBAL_GUARANTEED
        s0 = smooth21(grid, 400 + seed, amp=0.5)
        bound = apriori_bound(s0, prm)
        traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=50), 2.0)
        peak = max(
            h1_norm(st.u1) ** 2 + h1_norm(st.u2) ** 2 + h1_norm(st.v) ** 2
            for st in traj.states
        )
        margins.append(peak / bound)
        ok = ok and traj.status is Status.COMPLETED and peak < bound
    report(11, ok,
           f"10 random global-regime runs: H1 sums below the a-priori ceiling "
           f"(largest used fraction {max(margins):.2e})")


def test_12_determinism(tmp_path):
    doc = {
        "system": "two-plus-one",
        "params": {"alpha1": 1.0, "alpha2": 1.0, "gamma1": 1.0, "gamma2": 1.0,
                   "beta": 1.0, "q1": 2.0, "q2": 2.0, "p": 1},
        "grid": {"L": 40.0, "N": 128},
        "integrator": {"dt": 0.005},
        "task": {"name": "simulate", "T": 0.2, "dump_fields": True,
                 "initial": {"type": "gaussian",
                             "amplitudes": [0.5, 0.4, 0.3],
                             "widths": [2.0, 2.5, 3.0]}},
        "seed": 7,
    }
    cfg = parse_config(json.dumps(doc))
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    mismatches = []
    for path_a in sorted((tmp_path / "a").iterdir()):
        if path_a.name == "manifest.json":
            continue
        path_b = tmp_path / "b" / path_a.name
        if hashlib.sha256(path_a.read_bytes()).hexdigest() \
                != hashlib.sha256(path_b.read_bytes()).hexdigest():
            mismatches.append(path_a.name)
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    ok = not mismatches and ma == mb
    report(12, ok,
           "repeated runs byte-identical (all artifacts; manifest modulo wall "
           f"time); mismatches: {mismatches or 'none'}")
