import numpy as np
import pytest

from dlab.conserved import invariants, mass
from dlab.evolve import (
    IntegratorConfig,
    Status,
    apriori_bound,
    integrate,
    stable_dt_ceiling,
    step,
)
from dlab.model import Params12, Params21, State12, State21
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
from dlab.waves import WaveParams, assemble_traveling, kdv_profile, nls_profile


def zero(grid, kind=COMPLEX):
    return Field(grid, np.zeros(grid.N), kind)


def smooth21(grid, seed, amp=0.5):
    rng = np.random.default_rng(seed)
    band = np.abs(grid.k) <= grid.k_max / 6

    def f(complex_kind):
        c = np.zeros(grid.N, dtype=complex)
        c[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
        vals = np.fft.ifft(c * grid.N) / np.sqrt(band.sum())
        vals = amp * vals
        return vals if complex_kind else np.real(vals)

    return State21(
        u1=Field(grid, f(True), COMPLEX),
        u2=Field(grid, f(True), COMPLEX),
        v=Field(grid, f(False), REAL),
    )


class TestLinearLimit:
    def test_step_equals_exact_groups(self):
        grid = make_grid(40.0, 256)
        prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=0)
        s = smooth21(grid, 0)
        dt = 0.05
        out = step(s, prm, IntegratorConfig(dt=dt))
        exact = (
            apply_schrodinger_group(s.u1, dt),
            apply_schrodinger_group(s.u2, dt),
            apply_airy_group(s.v, dt),
        )
        for got, want in zip((out.u1, out.u2, out.v), exact):
            assert np.max(np.abs(got.values - want.values)) <= 1e-12

    def test_reversibility(self):
        grid = make_grid(40.0, 256)
        prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=0)
        s = smooth21(grid, 1)
        fwd = integrate(s, prm, IntegratorConfig(dt=0.01, monitor_stride=100), 1.0)
        back = integrate(fwd.final_state, prm,
                         IntegratorConfig(dt=-0.01, monitor_stride=100), 1.0)
        out = back.final_state
        for a, b in zip((out.u1, out.u2, out.v), (s.u1, s.u2, s.v)):
            assert np.max(np.abs(a.values - b.values)) <= 1e-10


class TestSolitonTransport:
    def test_kdv_soliton_travels_exactly(self):
        grid = make_grid(80.0, 512)
        prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=1.0, p=1)
        w0 = kdv_profile(1, 1.0, 1.0, grid)
        s0 = State21(u1=zero(grid), u2=zero(grid), v=w0)
        traj = integrate(s0, prm, IntegratorConfig(dt=1e-3, monitor_stride=10**9), 1.0)
        exact = translate(w0, -1.0)  # profile moved to x = +t at speed C = 1
        err = np.max(np.abs(traj.final_state.v.values - exact.values))
        assert err <= 1e-6

    def test_fourth_order_self_convergence(self):
        grid = make_grid(80.0, 512)
        prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=1.0, p=1)
        w0 = kdv_profile(1, 1.0, 1.0, grid)
        s0 = State21(u1=zero(grid), u2=zero(grid), v=w0)
        exact = translate(w0, -1.0).values
        errs = []
        for dt in (4e-3, 2e-3, 1e-3):
            traj = integrate(s0, prm,
                             IntegratorConfig(dt=dt, monitor_stride=10**9), 1.0)
            errs.append(np.max(np.abs(traj.final_state.v.values - exact)))
        slope = np.log(errs[0] / errs[2]) / np.log(4.0)
        assert slope == pytest.approx(4.0, abs=0.3)

    def test_halving_dt_reduces_error_16x(self):
        grid = make_grid(80.0, 512)
        prm = Params21(alpha1=0, alpha2=0, gamma1=0, gamma2=0, beta=1.0, p=1)
        w0 = kdv_profile(1, 1.0, 1.0, grid)
        s0 = State21(u1=zero(grid), u2=zero(grid), v=w0)
        exact = translate(w0, -1.0).values
        errs = []
        for dt in (4e-3, 2e-3):
            traj = integrate(s0, prm,
                             IntegratorConfig(dt=dt, monitor_stride=10**9), 1.0)
            errs.append(np.max(np.abs(traj.final_state.v.values - exact)))
        assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.2)


class TestSchemeAgreement:
    def test_ifrk4_vs_strang_second_order_difference(self):
        grid = make_grid(40.0, 256)
        prm = Params21()
        s0 = smooth21(grid, 2, amp=0.4)
        diffs = []
        for dt in (4e-3, 2e-3, 1e-3):
            a = integrate(s0, prm, IntegratorConfig(dt=dt, scheme="IFRK4",
                                                    monitor_stride=10**9), 0.1)
            b = integrate(s0, prm, IntegratorConfig(dt=dt, scheme="Strang",
                                                    monitor_stride=10**9), 0.1)
            diffs.append(max(
                np.max(np.abs(a.final_state.u1.values - b.final_state.u1.values)),
                np.max(np.abs(a.final_state.v.values - b.final_state.v.values)),
            ))
        slope = np.log(diffs[0] / diffs[2]) / np.log(4.0)
        assert slope == pytest.approx(2.0, abs=0.4)


class TestConservationUnderFlow:
    def test_mass_drift_tiny(self):
        grid = make_grid(40.0, 256)
        prm = Params21()
        s0 = smooth21(grid, 3, amp=0.6)
        traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=50), 1.0)
        assert traj.status is Status.COMPLETED
        last = traj.reports[-1]
        assert last.drift_masses[0] <= 1e-8
        assert last.drift_masses[1] <= 1e-8

    def test_energy_momentum_drift(self):
        grid = make_grid(40.0, 256)
        prm = Params21()
        s0 = smooth21(grid, 4, amp=0.5)
        traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=100), 2.0)
        last = traj.reports[-1]
        assert last.drift_energy <= 5e-7
        assert last.drift_momentum <= 5e-7

    def test_12_system_drifts(self):
        grid = make_grid(40.0, 256)
        prm = Params12()
        rng = np.random.default_rng(5)
        band = np.abs(grid.k) <= grid.k_max / 6

        def f(complex_kind):
            c = np.zeros(grid.N, dtype=complex)
            c[band] = rng.standard_normal(band.sum()) \
                + 1j * rng.standard_normal(band.sum())
            vals = 0.5 * np.fft.ifft(c * grid.N) / np.sqrt(band.sum())
            return vals if complex_kind else np.real(vals)

        s0 = State12(u=Field(grid, f(True), COMPLEX),
                     v1=Field(grid, f(False), REAL),
                     v2=Field(grid, f(False), REAL))
        traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=100), 2.0)
        last = traj.reports[-1]
        assert last.drift_energy <= 5e-7
        assert last.drift_momentum <= 5e-7
        assert last.drift_masses[0] <= 1e-10


class TestGalileanSanity:
    def test_boosted_nls_soliton_translates(self):
        # pure NLS: a lattice phase tilt b makes the hump travel at speed 2b
        grid = make_grid(80.0, 512)
        prm = Params21(alpha1=0, alpha2=0, gamma1=1.0, gamma2=0, beta=0, q1=2.0)
        psi = nls_profile(2.0, prm.gamma1 / 4.0, 1.0, grid)
        b = 2 * np.pi * 8 / grid.L
        u1 = Field(grid, np.exp(1j * b * grid.x) * psi.values, COMPLEX)
        s0 = State21(u1=u1, u2=zero(grid), v=zero(grid, REAL))
        T = 5.0
        traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=10**9), T)
        prof = np.abs(traj.final_state.u1.values)
        # center of the hump via circular first moment
        angles = 2 * np.pi * (grid.x + grid.L / 2) / grid.L
        weight = prof**2
        z = np.sum(weight * np.exp(1j * angles)) / np.sum(weight)
        center = (np.angle(z) / (2 * np.pi)) * grid.L - grid.L / 2
        expected = 2 * b * T
        circ_dist = abs((center - expected + grid.L / 2) % grid.L - grid.L / 2)
        assert circ_dist <= 0.01 * abs(2 * b * T)


class TestGuards:
    def test_zero_data_completes(self):
        grid = make_grid(20.0, 64)
        s0 = State21(u1=zero(grid), u2=zero(grid), v=zero(grid, REAL))
        traj = integrate(s0, Params21(), IntegratorConfig(dt=1e-2), 0.5)
        assert traj.status is Status.COMPLETED
        assert all(np.max(np.abs(f.values)) == 0 for f in
                   (traj.final_state.u1, traj.final_state.u2, traj.final_state.v))

    def test_blowup_guard_triggers_before_nan(self):
        # supercritical focusing envelope: guard must fire while fields are finite
        grid = make_grid(20.0, 256)
        prm = Params21(gamma1=1.0, q1=6.0, gamma2=1.0, alpha1=0, alpha2=0, beta=0)
        psi = 3.0 * np.exp(-grid.x**2)
        s0 = State21(u1=Field(grid, psi.astype(complex), COMPLEX),
                     u2=zero(grid), v=zero(grid, REAL))
        h1_0 = h1_norm(s0.u1)
        cfg = IntegratorConfig(dt=2e-5, monitor_stride=1, max_h1=3.0 * h1_0)
        traj = integrate(s0, prm, cfg, 1.0)
        assert traj.status is Status.BLOWUP_GUARD
        # every recorded state is finite: the guard preceded any NaN
        for st in traj.states:
            assert np.all(np.isfinite(st.u1.values.view(float)))

    def test_monotone_time_stamps(self):
        grid = make_grid(20.0, 64)
        s0 = smooth21(grid, 6, amp=0.2)
        traj = integrate(s0, Params21(), IntegratorConfig(dt=1e-2), 0.3)
        assert all(a < b for a, b in zip(traj.times, traj.times[1:]))

    def test_dt_ceiling_positive(self):
        grid = make_grid(40.0, 256)
        s0 = smooth21(grid, 7, amp=0.5)
        assert stable_dt_ceiling(s0, Params21()) > 0


class TestAprioriBound:
    def test_zero_data_positive_constant(self):
        grid = make_grid(40.0, 128)
        s0 = State21(u1=zero(grid), u2=zero(grid), v=zero(grid, REAL))
        b = apriori_bound(s0, Params21())
        assert np.isfinite(b) and b > 0

    def test_monotone_in_longwave_norm(self):
        grid = make_grid(40.0, 128)
        bounds = []
        for amp in (0.5, 1.0, 2.0):
            v = Field(grid, amp * np.exp(-grid.x**2 / 4), REAL)
            s0 = State21(u1=zero(grid), u2=zero(grid), v=v)
            bounds.append(apriori_bound(s0, Params21()))
        assert bounds[0] <= bounds[1] <= bounds[2]

    def test_rejects_local_only(self):
        grid = make_grid(40.0, 128)
        s0 = State21(u1=zero(grid), u2=zero(grid), v=zero(grid, REAL))
        with pytest.raises(ValueError):
            apriori_bound(s0, Params21(p=2))

    def test_trajectories_stay_below_bound(self):
        grid = make_grid(40.0, 256)
        prm = Params21()
        for seed in range(3):
            s0 = smooth21(grid, 100 + seed, amp=0.5)
            bound = apriori_bound(s0, prm)
            traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=50),
                             2.0)
            for st in traj.states:
                total = h1_norm(st.u1) ** 2 + h1_norm(st.u2) ** 2 + h1_norm(st.v) ** 2
                assert total < bound


class TestTravelingPersistence:
    def test_decoupled_traveling_wave_is_exact_solution(self):
        grid = make_grid(80.0, 512)
        prm = Params21(alpha1=0.0, alpha2=0.0)
        c = 4 * np.pi * 7 / grid.L  # lattice-commensurate
        sigma1, sigma2 = 0.9, 0.7
        phi1 = nls_profile(prm.q1, prm.gamma1 / (prm.q1 + 2), sigma1, grid)
        phi2 = nls_profile(prm.q2, prm.gamma2 / (prm.q2 + 2), sigma2, grid)
        w = kdv_profile(prm.p, prm.beta, c, grid)
        wp = WaveParams.from_multipliers(sigma1, sigma2, c)
        s0 = assemble_traveling(phi1, phi2, w, wp, t=0.0)
        T = 2.0
        traj = integrate(s0, prm, IntegratorConfig(dt=2e-3, monitor_stride=10**9), T)
        expected = assemble_traveling(phi1, phi2, w, wp, t=T)
        for got, want in ((traj.final_state.u1, expected.u1),
                          (traj.final_state.u2, expected.u2),
                          (traj.final_state.v, expected.v)):
            assert np.max(np.abs(got.values - want.values)) <= 1e-4
