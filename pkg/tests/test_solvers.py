from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from compact_conserve.errors import DegenerateErrors, NegativePressure, NonFiniteState
from compact_conserve.operator import build_periodic_operator, scheme_operator
from compact_conserve.scheme import SCHEME_IDS
from compact_conserve.schemefile import bundled_scheme
from compact_conserve.solvers import (
    TimeIntegrationConfig,
    VortexConfig,
    advect_1d,
    advect_2d_varcoeff,
    complex_step_time_derivative,
    conservation_monitor,
    error_and_order,
    euler_rhs,
    euler_vortex_2d,
    identity_residual,
    rk4_step,
    vortex_state,
)
from compact_conserve.solvers.euler import fluxes, pressure
from compact_conserve.scheme import assemble_matrices


class TestTimeStepping:
    def test_config(self):
        assert TimeIntegrationConfig(1.0, dt=0.3).steps() == (4, 0.25)
        n, dt = TimeIntegrationConfig(10.0, cfl=0.5).steps(h=0.1)
        assert n == 200 and dt == pytest.approx(0.05)
        for kwargs in ({}, {"dt": 0.1, "cfl": 0.5}, {"dt": 2.0}, {"cfl": -1.0}):
            with pytest.raises(ValueError):
                TimeIntegrationConfig(1.0, **kwargs)

    def test_zero_rhs(self):
        u = np.arange(5.0)
        assert np.array_equal(rk4_step(lambda v, t: np.zeros_like(v), u, 0.0, 0.1), u)

    def test_decay(self):
        # one step on u' = -u is the degree-4 Taylor polynomial of exp(-dt)
        out = rk4_step(lambda v, t: -v, np.array([1.0]), 0.0, 0.1)
        dt = Fraction(1, 10)
        exact = float(sum((-dt) ** k / factorial(k) for k in range(5)))
        assert exact == 0.9048375
        assert out[0] == pytest.approx(exact, abs=1e-15)
        assert abs(out[0] - np.exp(-0.1)) < 1e-7

    def test_linear_taylor(self):
        rng = np.random.default_rng(0)
        L = rng.standard_normal((4, 4))
        u = rng.standard_normal(4)
        dt = 0.05
        taylor = u.copy()
        term = u.copy()
        for k in range(1, 5):
            term = dt * L @ term / k
            taylor = taylor + term
        assert np.allclose(rk4_step(lambda v, t: L @ v, u, 0.0, dt), taylor, rtol=1e-13, atol=1e-15)

    def test_nonfinite(self):
        with pytest.raises(NonFiniteState) as info:
            rk4_step(lambda v, t: np.full_like(v, np.inf), np.zeros(2), 1.0, 0.5)
        assert info.value.t == pytest.approx(1.5)

    def test_complex_step(self):
        assert complex_step_time_derivative(np.sin, 0.3) == pytest.approx(np.cos(0.3), abs=1e-15)


class TestOrder:
    def test_synthetic_slope(self):
        est = error_and_order([(h, 3.0 * h**4) for h in (0.1, 0.05, 0.025)])
        assert est.slope == pytest.approx(4.0, abs=1e-12)

    def test_pairwise(self):
        est = error_and_order([(0.1, 16e-6), (0.05, 1e-6)])
        assert est.pairwise[0] == pytest.approx(4.0, abs=1e-12)

    def test_unsorted_input(self):
        est = error_and_order([(0.05, 1e-6), (0.1, 16e-6)])
        assert est.h[0] == 0.1 and est.slope == pytest.approx(4.0)

    @pytest.mark.parametrize("runs", [[(0.1, 1e-3), (0.05, 1e-15)], [(0.1, 1e-3)], [(0.1, 1e-3), (0.1, 1e-4)],
                                      [(0.1, np.nan), (0.05, 1e-3)]])
    def test_degenerate(self, runs):
        with pytest.raises(DegenerateErrors):
            error_and_order(runs)


class TestAdvection1D:
    def test_initial_error_zero(self):
        run = advect_1d("P1", 33, t_final=0.05)
        assert run.errors[0] == 0.0
        assert np.all(np.diff(run.times) > 0)

    def test_doubling_gives_fourth_order(self):
        e64 = advect_1d("P2", 65, t_final=2.0).max_error
        e128 = advect_1d("P2", 129, t_final=2.0).max_error
        assert 12 < e64 / e128 < 20

    @pytest.mark.parametrize("sid", ["P1", "P2"])
    def test_constant_state(self, sid):
        run = advect_1d(sid, 41, t_final=2.0, profile=lambda x: 2.0 + 0.0 * x)
        assert run.max_error <= 1e-12

    def test_constant_state_p3(self):
        # the tabulated B rows of P3 annihilate constants only to ~2e-15
        run = advect_1d("P3", 41, t_final=2.0, profile=lambda x: 2.0 + 0.0 * x)
        assert run.max_error <= 1e-11

    def test_p1_order(self):
        runs = [advect_1d("P1", n, t_final=2.0) for n in (65, 129, 257)]
        est = error_and_order([(r.h, r.max_error) for r in runs])
        assert 3.7 <= est.slope <= 4.3

    def test_stage_mode_runs(self):
        run = advect_1d("P3", 65, t_final=1.0, boundary_mode="stage")
        assert run.max_error < 1e-3
        with pytest.raises(ValueError):
            advect_1d("P3", 65, t_final=1.0, boundary_mode="other")

    def test_error_at(self):
        run = advect_1d("P1", 65, t_final=2.0)
        assert run.error_at(1.0) <= run.error_at(2.0) == run.max_error


class TestConservation:
    @pytest.mark.parametrize("sid", SCHEME_IDS)
    def test_zero_flux_state(self, sid):
        m = assemble_matrices(bundled_scheme(sid), 50)
        assert identity_residual(m, np.full(51, 3.0)) <= 1e-12
        assert identity_residual(m, np.zeros(51)) == 0.0

    @pytest.mark.parametrize("sid", SCHEME_IDS)
    def test_random_states(self, sid):
        m = assemble_matrices(bundled_scheme(sid), 64)
        rng = np.random.default_rng(5)
        assert max(identity_residual(m, rng.standard_normal(65)) for _ in range(100)) <= 1e-10

    @pytest.mark.parametrize("sid", SCHEME_IDS)
    def test_pulse_mass_exact(self, sid):
        # a narrow pulse away from both ends: the weighted mass is constant
        pulse = lambda x: np.exp(-(((x - np.pi) / 0.25) ** 2))  # noqa: E731
        run = advect_1d(sid, 129, t_final=1.0, profile=pulse)
        hist = conservation_monitor(sid, run)
        assert hist.max_step_mismatch <= 1e-12
        assert hist.max_identity_residual <= 1e-10
        assert abs(run.mass[-1] - run.mass[0]) <= 1e-12

    def test_sine_mismatch_is_small(self):
        run = advect_1d("P1", 129, t_final=2.0)
        hist = conservation_monitor("P1", run)
        assert hist.times.size == run.flux_avg.size
        assert hist.max_step_mismatch < 1e-6

    def test_requires_1d_run(self):
        run = advect_2d_varcoeff("P1", 21, dt=0.01, t_final=0.02)
        with pytest.raises(ValueError):
            conservation_monitor("P1", run)


class TestAdvection2D:
    def test_unit_speed(self):
        x = np.linspace(0, np.sqrt(2), 11)
        X, Y = np.meshgrid(x, x)
        psi = np.hypot(X + 0.25, Y + 0.25)
        assert np.allclose(((X + 0.25) / psi) ** 2 + ((Y + 0.25) / psi) ** 2, 1.0, atol=1e-15)

    def test_short_order(self):
        runs = [advect_2d_varcoeff("P2", n, dt=0.001, t_final=0.2) for n in (41, 61)]
        est = error_and_order([(r.h, r.max_error) for r in runs])
        assert 3.5 <= est.slope <= 4.5


class TestEuler:
    def setup_method(self):
        self.cfg = VortexConfig(epsilon=0.1, n_x=30)

    def test_exact_solution_satisfies_euler(self):
        cfg = self.cfg
        rng = np.random.default_rng(2)
        x = rng.uniform(-0.2, 0.2, 40)
        y = rng.uniform(-0.2, 0.2, 40)
        t, eps = 0.03, 1e-30
        dq_dt = vortex_state(cfg, x, y, t + 1j * eps).imag / eps
        de_dx = np.imag(fluxes(vortex_state(cfg, x + 1j * eps, y, t))[0]) / eps
        df_dy = np.imag(fluxes(vortex_state(cfg, x, y + 1j * eps, t))[1]) / eps
        resid = dq_dt + de_dx + df_dy
        assert np.max(np.abs(resid)) <= 1e-10 * np.max(np.abs(de_dx))

    def test_pressure_positive_and_isentropic(self):
        x, y, _, _ = self.cfg.grid()
        X, Y = np.meshgrid(x, y)
        q = vortex_state(self.cfg, X, Y)
        p = pressure(q)
        assert np.all(p > 0) and np.allclose(p, q[0] ** 1.4, rtol=1e-12)

    def test_grid(self):
        x, y, hx, hy = VortexConfig(n_x=60).grid()
        assert x[0] == -0.5 and x[-1] == pytest.approx(1.0) and x.size == 60
        assert y[0] == -0.75 and y.size == 60 and hy == pytest.approx(0.025)

    def test_config_validation(self):
        for kwargs in ({"epsilon": -0.1}, {"mach": 0.8}, {"radius": 0.0}, {"n_x": 5}, {"boundary_mode": "x"}):
            with pytest.raises(ValueError):
                VortexConfig(**kwargs)

    def test_y_roll_equivariance(self):
        cfg = self.cfg
        x, y, hx, hy = cfg.grid()
        X, Y = np.meshgrid(x, y)
        q = vortex_state(cfg, X, Y + 0.1)
        op_x = scheme_operator(bundled_scheme("P2"), cfg.n_x - 1, 1.5)
        op_y = build_periodic_operator(cfg.ny, hy)
        base = euler_rhs(q, op_x, op_y)
        rolled = euler_rhs(np.roll(q, 7, axis=1), op_x, op_y)
        assert np.max(np.abs(rolled - np.roll(base, 7, axis=1))) <= 1e-12 * np.max(np.abs(base))
        # a full period is the identity
        assert np.array_equal(euler_rhs(np.roll(q, cfg.ny, axis=1), op_x, op_y), base)

    def test_uniform_stream_is_steady(self):
        run = euler_vortex_2d("P3", VortexConfig(epsilon=1e-14, n_x=20, t_final=0.3))
        free = vortex_state(run.config, *np.meshgrid(run.x, run.y))
        assert np.max(np.abs(run.final.q - free)) <= 1e-11

    def test_short_run(self):
        cfg = VortexConfig(epsilon=0.1, n_x=40, t_final=0.5, snapshot_times=(0.0, 0.5))
        run = euler_vortex_2d("P1", cfg)
        assert np.all(run.final.pressure > 0)
        assert run.times[-1] == pytest.approx(0.5)
        assert run.dt == pytest.approx(0.5 * run.h / cfg.u_inf, rel=0.05)
        assert set(run.snapshots) == {0.0, 0.5}
        # vorticity peak moves with the stream: from x = 0 to x = 0.5
        vort, _ = run.snapshots[0.5]
        j, i = np.unravel_index(np.argmax(np.abs(vort)), vort.shape)
        assert abs(run.x[i] - 0.5) <= run.h and abs(run.y[j]) <= run.h

    def test_blow_up_reports_time(self):
        with pytest.raises(NonFiniteState) as info:
            euler_vortex_2d("P3", VortexConfig(epsilon=4.0, n_x=16, cfl=4.0, t_final=2.0))
        assert info.value.t > 0
        assert issubclass(NegativePressure, NonFiniteState)
