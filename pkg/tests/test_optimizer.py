import numpy as np
import pytest

from compact_conserve.errors import NoFeasiblePoint
from compact_conserve.optimizer import (
    PENALTY,
    DEConfig,
    OptimizationProblem,
    default_bounds,
    objective,
    optimize,
)
from compact_conserve.scheme import SCHEME_IDS
from compact_conserve.schemefile import bundled_scheme

PUBLISHED = {sid: bundled_scheme(sid).free_params for sid in SCHEME_IDS}


class TestProblem:
    def test_bounds(self):
        assert default_bounds("P1") == ((1e-9, 10 - 1e-9),)
        b = default_bounds("P3")
        assert len(b) == 6 and b[-1][0] == 1e-9 and b[0][0] == -10 + 1e-9

    def test_arity_checked(self):
        with pytest.raises(ValueError):
            OptimizationProblem("P2", bounds=[(0, 1)])
        with pytest.raises(ValueError):
            OptimizationProblem("P5")

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DEConfig(population_size=3)
        with pytest.raises(ValueError):
            DEConfig(crossover_rate=1.5)
        with pytest.raises(ValueError):
            DEConfig(mutation_factor=(0.5, 2.5))


class TestObjective:
    @pytest.mark.parametrize("sid", SCHEME_IDS)
    def test_published_points_feasible(self, sid):
        value = objective(OptimizationProblem(sid), PUBLISHED[sid])
        assert -0.995 <= value <= -0.90

    def test_frozen_values(self):
        expected = {"P1": -0.965, "P2": -0.965, "P3": -0.985}
        for sid, ref in expected.items():
            assert objective(OptimizationProblem(sid), PUBLISHED[sid]) == pytest.approx(ref, abs=1e-12)

    def test_p1_table_value(self):
        assert objective(OptimizationProblem("P1"), [0.365512831337]) == pytest.approx(-0.9268, abs=0.04)

    def test_nonpositive_weight_penalty(self):
        assert objective(OptimizationProblem("P1"), [0.0]) == PENALTY

    def test_singular_closure_penalty(self):
        assert objective(OptimizationProblem("P1"), [1 / 6]) == PENALTY

    def test_nonfinite_penalty(self):
        assert objective(OptimizationProblem("P1"), [np.nan]) == PENALTY

    def test_literal_sign_rejects_published(self):
        # without the minus sign the reduced spectrum lies in the right half plane
        assert objective(OptimizationProblem("P1", literal_sign=True), PUBLISHED["P1"]) == PENALTY

    def test_pure(self):
        p = OptimizationProblem("P2")
        assert objective(p, PUBLISHED["P2"]) == objective(p, dict(PUBLISHED["P2"]))


class TestOptimize:
    def test_p1_reaches_high_resolution(self):
        res = optimize(OptimizationProblem("P1", seed=7), DEConfig(population_size=20, max_generations=200))
        assert res.best_objective <= -0.90
        assert res.scheme.scheme_id == "P1"
        assert objective(OptimizationProblem("P1"), res.best_params) == res.best_objective
        assert all(b <= a for a, b in zip(res.history, res.history[1:]))

    def test_deterministic(self):
        cfg = DEConfig(max_generations=15)
        r1 = optimize(OptimizationProblem("P2", seed=3), cfg)
        r2 = optimize(OptimizationProblem("P2", seed=3), cfg)
        assert r1.history == r2.history and r1.best_params == r2.best_params

    def test_threads_do_not_change_result(self):
        p = OptimizationProblem("P1", seed=11)
        r1 = optimize(p, DEConfig(max_generations=10))
        r2 = optimize(p, DEConfig(max_generations=10, workers=4))
        assert r1.history == r2.history and r1.best_params == r2.best_params

    def test_collapsed_box(self):
        w0 = PUBLISHED["P1"]["w0"]
        res = optimize(OptimizationProblem("P1", bounds=[(w0, w0)]), DEConfig(max_generations=3))
        assert res.best_params["w0"] == w0
        assert res.best_objective == objective(OptimizationProblem("P1"), [w0])

    def test_no_feasible_point(self):
        # w0 > 55/72 makes w1 negative everywhere in this box
        with pytest.raises(NoFeasiblePoint):
            optimize(OptimizationProblem("P1", bounds=[(0.8, 1.0)]), DEConfig(max_generations=2))

    def test_initial_members(self):
        res = optimize(OptimizationProblem("P1", seed=0), DEConfig(max_generations=0),
                       initial=[[PUBLISHED["P1"]["w0"]]])
        assert res.generations == 0 and res.best_objective <= -0.9

    def test_progress_callback(self):
        seen = []
        optimize(OptimizationProblem("P1"), DEConfig(max_generations=4), progress=lambda *a: seen.append(a))
        assert [s[0] for s in seen][:2] == [0, 1] and all(len(s) == 3 for s in seen)
