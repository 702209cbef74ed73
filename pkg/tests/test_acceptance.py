"""Acceptance criteria 1-10, one verdict line each.

Run ``pytest tests/test_acceptance.py -v``; the verdict lines appear in the
"acceptance criteria" section of the terminal summary.  Running this file
directly with python prints the same lines.
"""

import json
import time
from importlib import resources

import numpy as np
import pytest

from compact_conserve.analysis import average_resolution, quadrature_precision, stability_spectrum
from compact_conserve.optimizer import DEConfig, OptimizationProblem, objective, optimize
from compact_conserve.scheme import SCHEME_IDS, assemble_matrices, close_scheme, derived_weights
from compact_conserve.schemefile import bundled_scheme
from compact_conserve.solvers import (
    VortexConfig,
    advect_1d,
    advect_2d_varcoeff,
    error_and_order,
    euler_vortex_2d,
)

PUBLISHED_OMEGA_F = {"P1": 0.9268, "P2": 0.9425, "P3": 0.9737}


def published_table(sid):
    doc = json.loads(resources.files("compact_conserve").joinpath(f"data/{sid}.json").read_text())
    values = {k: float(v) for sec in ("coefficients", "weights", "aux_weights") for k, v in doc[sec].items()}
    return {k: float(v) for k, v in doc["free_params"].items()}, values


def test_c01_table_round_trip(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for sid in SCHEME_IDS:
        params, values = published_table(sid)
        closed = close_scheme(sid, params).all_values()
        for name, ref in values.items():
            if ref == 0.0:
                err = abs(closed[name])
            else:
                err = abs(closed[name] - ref) / abs(ref)
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    ok = verdict(1, worst <= 1e-9 and elapsed < 1.0,
                 f"max relative deviation {worst:.2e} (tol 1e-9), {elapsed:.2f} s (< 1 s)")
    assert ok


def test_c02_conservation_identities(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    wa = wb = ident = 0.0
    for sid in SCHEME_IDS:
        m = assemble_matrices(bundled_scheme(sid), 100)
        target = np.zeros(101)
        target[0], target[-1] = -1.0, 1.0
        wa = max(wa, np.max(np.abs(m.wprime_vector @ m.a_matrix - m.w_vector)))
        wb = max(wb, np.max(np.abs(m.wprime_vector @ m.b_matrix - target)))
        for _ in range(1000):
            f = rng.standard_normal(101) * 10 ** rng.uniform(-6, 6)
            ident = max(ident, abs(m.wprime_vector @ (m.b_matrix @ f) - (f[-1] - f[0])) / np.max(np.abs(f)))
    elapsed = time.perf_counter() - t0
    ok = verdict(2, wa <= 1e-9 and wb <= 1e-9 and ident <= 1e-10 and elapsed < 5.0,
                 f"|W'A-W| {wa:.1e}, |W'B-e| {wb:.1e} (tol 1e-9), identity {ident:.1e}/||F|| (tol 1e-10), "
                 f"{elapsed:.2f} s (< 5 s)")
    assert ok


def test_c03_quadrature_precision(verdict):
    t0 = time.perf_counter()
    families = {sid: bundled_scheme(sid).weights for sid in SCHEME_IDS}
    families["gregory"] = derived_weights(3 / 8)
    degrees = {name: min(quadrature_precision(w, n) for n in (20, 31)) for name, w in families.items()}
    elapsed = time.perf_counter() - t0
    ok = verdict(3, all(d >= 3 for d in degrees.values()) and elapsed < 1.0,
                 "exact through degree 3 at n = 20, 31; measured maximal degree "
                 + ", ".join(f"{k} {v}" for k, v in degrees.items()) + f"; {elapsed:.2f} s (< 1 s)")
    assert ok


def test_c04_stability_spectra(verdict):
    t0 = time.perf_counter()
    worst = {sid: max(stability_spectrum(bundled_scheme(sid), n).max_real_part for n in (50, 100, 200))
             for sid in SCHEME_IDS}
    elapsed = time.perf_counter() - t0
    ok = verdict(4, all(v < 0 for v in worst.values()) and elapsed < 30.0,
                 "max Re(lambda) over n = 50, 100, 200: "
                 + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f"; {elapsed:.2f} s (< 30 s)")
    assert ok


def test_c05_resolution_values(verdict):
    t0 = time.perf_counter()
    got = {sid: average_resolution(bundled_scheme(sid)).omega_f for sid in SCHEME_IDS}
    elapsed = time.perf_counter() - t0
    within = {sid: got[sid] is not None and abs(got[sid] - PUBLISHED_OMEGA_F[sid]) <= 0.02 for sid in SCHEME_IDS}
    ok = verdict(5, all(within.values()) and elapsed < 10.0,
                 ", ".join(f"{sid} {got[sid]:.4f} vs {PUBLISHED_OMEGA_F[sid]} ({'ok' if within[sid] else 'off'})"
                           for sid in SCHEME_IDS) + f" (tol 0.02); {elapsed:.2f} s (< 10 s)")
    assert ok


@pytest.mark.slow
def test_c06_advection_1d_order(verdict):
    t0 = time.perf_counter()
    slopes = {}
    for sid in SCHEME_IDS:
        runs = [advect_1d(sid, n, t_final=10.0) for n in (65, 129, 257, 513)]
        slopes[sid] = error_and_order([(r.h, r.max_error) for r in runs]).slope
    elapsed = time.perf_counter() - t0
    ok = verdict(6, all(3.7 <= s <= 4.3 for s in slopes.values()) and elapsed < 300.0,
                 "least-squares order " + ", ".join(f"{k} {v:.3f}" for k, v in slopes.items())
                 + f" (range [3.7, 4.3]); {elapsed:.1f} s (< 300 s)")
    assert ok


@pytest.mark.slow
def test_c07_advection_2d_order(verdict):
    t0 = time.perf_counter()
    slopes = {}
    for sid in SCHEME_IDS:
        runs = [advect_2d_varcoeff(sid, n, dt=0.001, t_final=1.0) for n in (21, 41, 61, 81)]
        slopes[sid] = error_and_order([(r.h, r.max_error) for r in runs]).slope
    elapsed = time.perf_counter() - t0
    ok = verdict(7, all(3.5 <= s <= 4.5 for s in slopes.values()) and elapsed < 900.0,
                 "least-squares order " + ", ".join(f"{k} {v:.3f}" for k, v in slopes.items())
                 + f" (range [3.5, 4.5]); {elapsed:.1f} s (< 900 s)")
    assert ok


@pytest.mark.slow
def test_c08_vortex(verdict):
    t0 = time.perf_counter()
    details, ok_all = [], True
    for sid in SCHEME_IDS:
        runs = {n: euler_vortex_2d(sid, VortexConfig(epsilon=0.1, n_x=n, t_final=2.0)) for n in (30, 60, 90)}
        errors = [runs[n].max_pressure_error for n in (30, 60, 90)]
        positive = all(np.all(r.final.pressure > 0) for r in runs.values())
        decreasing = errors[0] > errors[1] > errors[2]
        slope = error_and_order([(runs[n].h, runs[n].max_pressure_error) for n in runs]).slope
        ok_all &= positive and decreasing and 3.0 <= slope <= 4.5
        details.append(f"{sid} order {slope:.3f}, e60 {errors[1]:.2e}")
    elapsed = time.perf_counter() - t0
    ok = verdict(8, ok_all and elapsed < 1800.0,
                 "; ".join(details) + f" (positive pressure, decreasing, range [3.0, 4.5]); {elapsed:.1f} s (< 1800 s)")
    assert ok


@pytest.mark.slow
def test_c09_long_time(verdict):
    t0 = time.perf_counter()
    ratios = {}
    for sid in SCHEME_IDS:
        run = advect_1d(sid, 129, t_final=1000.0, snapshot_count=2)
        ratios[sid] = run.max_error / run.error_at(10.0)
    elapsed = time.perf_counter() - t0
    ok = verdict(9, all(r < 10 for r in ratios.values()) and elapsed < 600.0,
                 "max error over [0, 1000] / max error over [0, 10]: "
                 + ", ".join(f"{k} {v:.3f}" for k, v in ratios.items()) + f" (< 10); {elapsed:.1f} s (< 600 s)")
    assert ok


def test_c10_optimizer(verdict):
    t0 = time.perf_counter()
    values = {sid: objective(OptimizationProblem(sid), bundled_scheme(sid).free_params) for sid in SCHEME_IDS}
    result = optimize(OptimizationProblem("P1", seed=7), DEConfig(max_generations=200))
    elapsed = time.perf_counter() - t0
    ok = verdict(10, all(-0.995 <= v <= -0.90 for v in values.values()) and result.best_objective <= -0.90
                 and result.generations <= 200 and elapsed < 300.0,
                 "objective at published points " + ", ".join(f"{k} {v:.4f}" for k, v in values.items())
                 + f" (range [-0.995, -0.90]); DE P1 seed 7: {result.best_objective:.4f} after "
                 f"{result.generations} generations (<= -0.90); {elapsed:.1f} s (< 300 s)")
    assert ok


if __name__ == "__main__":
    import sys

    def printer(number, passed, detail):
        print(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    failed = 0
    for name, func in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                func(printer)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
