"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one `[criterion N] PASS/FAIL` line (visible with -s / -rA)
and enforces the stated runtime budget where one is given.
"""

import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from spinqnd import analytics, coupling, gaussian, montecarlo as mc, oracle
from spinqnd.cli import main
from spinqnd.model import ExperimentConfig, GaussianState, S1_Y, S2_Y

KAPPA = 0.63


@contextmanager
def criterion(number, description, budget_s=None):
    t0 = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[criterion {number:2d}] FAIL  {description}")
        raise
    elapsed = time.perf_counter() - t0
    print(f"[criterion {number:2d}] PASS  {description}  ({elapsed:.2f}s)")
    if budget_s is not None:
        assert elapsed < budget_s, f"criterion {number} took {elapsed:.2f}s > {budget_s}s"


def mc_tolerance(v, shots, n_sigma=5):
    return n_sigma * math.sqrt(2.0 / shots) * v


def test_criterion_01_kappa_reproduction(capsys):
    with criterion(1, "kappa from the yb171 preset is 0.63 +/- 0.02"):
        t0 = time.perf_counter()
        k = coupling.kappa_from_physics(coupling.YB171)
        dt = time.perf_counter() - t0
        assert abs(abs(k) - 0.63) <= 0.02
        assert dt < 1e-3
        # same number through the CLI surface
        assert main(["kappa", "--preset", "yb171"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["kappa"] == k


def test_criterion_02_engine_matches_closed_forms():
    with criterion(2, "chained Gaussian maps reproduce all closed forms to 1e-9",
                   budget_s=1.0):
        w_plus, w_minus = np.zeros(6), np.zeros(6)
        w_plus[[S1_Y, S2_Y]] = 1.0 / math.sqrt(2.0)
        w_minus[S1_Y], w_minus[S2_Y] = 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)
        for kappa in (0.0, 0.3, 0.63, 1.0):
            for i in range(17):
                phi = i * math.pi / 8.0
                st = GaussianState.fresh()
                st = gaussian.apply_faraday(st, 1, kappa)
                st = gaussian.apply_rotation(st, phi)
                st = gaussian.apply_faraday(st, 2, kappa)
                assert abs(gaussian.marginal_variance(st, S1_Y) - analytics.v1(kappa)) < 1e-9
                assert abs(gaussian.marginal_variance(st, S2_Y) - analytics.v2(kappa, phi)) < 1e-9
                assert abs(gaussian.linear_combination_variance(st, w_plus)
                           - analytics.v_pm(kappa, phi, +1)) < 1e-9
                assert abs(gaussian.linear_combination_variance(st, w_minus)
                           - analytics.v_pm(kappa, phi, -1)) < 1e-9
                assert abs(analytics.conditional_variance_engine(kappa, phi)
                           - analytics.v_cond(kappa, phi)) < 1e-9
                assert abs(analytics.coherent_variance_engine(kappa, phi)
                           - analytics.v_coh(kappa)) < 1e-9


def test_criterion_03_sum_difference_interchange():
    with criterion(3, "V+ and V- interchange between phi = 0 and phi = pi",
                   budget_s=10.0):
        shots = 10_000
        # analytic side
        high = analytics.v_pm(KAPPA, 0.0, +1)
        assert abs(high - 0.897) < 1e-3
        assert abs(analytics.v_pm(KAPPA, math.pi, -1) - high) < 1e-12
        assert abs(analytics.v_pm(KAPPA, 0.0, -1) - 0.5) < 1e-12
        assert abs(analytics.v_pm(KAPPA, math.pi, +1) - 0.5) < 1e-12
        # Monte Carlo side
        cfg = ExperimentConfig(kappa=KAPPA, angles=(0.0, math.pi), shots=shots, seed=2718)
        res = mc.sweep(cfg)
        at0, at_pi = [r for r in res.reports if not r.control]
        assert abs(at0.v_plus - high) < mc_tolerance(high, shots)
        assert abs(at_pi.v_minus - high) < mc_tolerance(high, shots)
        assert abs(at0.v_minus - 0.5) < mc_tolerance(0.5, shots)
        assert abs(at_pi.v_plus - 0.5) < mc_tolerance(0.5, shots)


def test_criterion_04_back_action_peak():
    with criterion(4, "V2 peaks at phi = pi/2, exceeding phi = 0 by kappa^4/2",
                   budget_s=10.0):
        shots = 10_000
        expected = KAPPA**4 / 2.0
        assert abs(expected - 0.0788) < 1e-4
        cfg = ExperimentConfig(kappa=KAPPA, angles=(0.0, math.pi / 2), shots=shots,
                               seed=1618)
        res = mc.sweep(cfg)
        at0, at_half = [r for r in res.reports if not r.control]
        tol = mc_tolerance(analytics.v2(KAPPA, math.pi / 2), shots)
        assert abs((at_half.v2 - at0.v2) - expected) < tol


def test_criterion_05_squeezing_retrieval():
    with criterion(5, "conditional variance 0.642 at phi = 0 and pi; "
                      "1.451 dB lossless, in [0.1, 1.5] dB with loss",
                   budget_s=1.0):
        exact = (1 + 2 * KAPPA**2) / (2 * (1 + KAPPA**2))
        assert abs(exact - 0.642) < 1e-3
        assert abs(analytics.v_cond(KAPPA, 0.0) - exact) < 1e-5
        assert abs(analytics.v_cond(KAPPA, math.pi) - exact) < 1e-5
        assert abs(analytics.v_cond(KAPPA, 0.0) - analytics.v_cond(KAPPA, math.pi)) < 1e-12
        assert abs(analytics.squeezing_db(KAPPA, 0.0) - 1.451) < 1e-3
        lossy = analytics.squeezing_db(KAPPA, 0.0, loss_epsilon=0.067)
        assert 0.1 <= lossy <= 1.5
        retrieved = analytics.squeezing_db(KAPPA, math.pi, loss_epsilon=0.067)
        assert 0.1 <= retrieved <= 1.5


def test_criterion_06_optimal_gain():
    with criterion(6, "numeric and Monte Carlo gain match kappa^2/(1+kappa^2)",
                   budget_s=30.0):
        for kappa in (0.3, 0.63, 1.0):
            cov = kappa**2 / 2.0

            def objective(g, kappa=kappa, cov=cov):
                return analytics.v2(kappa, 0.0) + g * g * analytics.v1(kappa) - 2 * g * cov

            g_num = mc.golden_section_minimize(objective, 0.0, 1.0, tol=1e-8)
            assert abs(g_num - analytics.g_opt(kappa)) < 1e-6

        shots = 100_000
        cfg = ExperimentConfig(kappa=KAPPA, angles=(0.0,), shots=shots, seed=577215)
        records = [
            mc.run_shot(cfg, 0.0, mc.shot_stream(cfg.seed, 0, j)) for j in range(shots)
        ]
        g_fit = mc.fit_global_g(records)
        assert abs(g_fit - analytics.g_opt(KAPPA)) < 0.02


def test_criterion_07_coherent_control_isotropy():
    with criterion(7, "coherent-control variance is isotropic in phi",
                   budget_s=10.0):
        shots = 10_000
        angles = tuple(np.linspace(0.0, math.pi, 8))
        cfg = ExperimentConfig(kappa=KAPPA, angles=angles, shots=shots, seed=141421)
        res = mc.sweep(cfg, first_pulse=False)
        v2s = [r.v2 for r in res.reports]
        bound = 4.0 * math.sqrt(2.0 / shots) * analytics.v_coh(KAPPA)
        assert max(v2s) - min(v2s) < bound


def test_criterion_08_oracle_convergence():
    with criterion(8, "exact-model deviation shrinks with size and is < 0.15 at N = 32",
                   budget_s=300.0):
        per_size = []
        for n in (8, 16, 32):
            devs = [
                oracle.max_deviation(oracle.deviation_report(n, n, 0.3, phi))
                for phi in (0.0, math.pi / 2, math.pi)
            ]
            per_size.append(max(devs))
        soft = 0
        for prev, cur in zip(per_size, per_size[1:]):
            assert cur <= prev * 1.10, f"deviation grew: {per_size}"
            if cur > prev:
                soft += 1
        assert soft <= 1
        assert per_size[-1] < 0.15


def test_criterion_09_simulation_determinism(tmp_path, capsys):
    with criterion(9, "identical config and seed give byte-identical outputs",
                   budget_s=20.0):
        config = {
            "kappa": KAPPA,
            "angles": list(np.linspace(0.0, math.pi, 11)),
            "shots": 1300,
            "loss_epsilon": 0.0,
            "seed": 90210,
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config))
        blobs = []
        for name in ("run1", "run2"):
            outdir = tmp_path / name
            code = main(["simulate", "--config", str(cfg_path),
                         "--outdir", str(outdir), "--no-figures"])
            capsys.readouterr()
            assert code == 0
            blobs.append(
                (
                    (outdir / "records.csv").read_bytes(),
                    (outdir / "report.json").read_bytes(),
                )
            )
        assert blobs[0][0] == blobs[1][0]
        assert blobs[0][1] == blobs[1][1]


def test_criterion_10_statistical_error_model():
    with criterion(10, "error bars follow sqrt(2/N) V, matching the scatter over seeds"):
        shots = 1300
        estimates, bars = [], []
        for seed in range(100):
            cfg = ExperimentConfig(kappa=KAPPA, angles=(0.0,), shots=shots, seed=seed)
            records = [
                mc.run_shot(cfg, 0.0, mc.shot_stream(cfg.seed, 0, j))
                for j in range(shots)
            ]
            rep = mc.estimate(records, analytics.g_opt(KAPPA))
            assert abs(rep.dv1 - math.sqrt(2.0 / shots) * rep.v1) < 1e-12
            assert abs(rep.dv2 - math.sqrt(2.0 / shots) * rep.v2) < 1e-12
            estimates.append(rep.v1)
            bars.append(rep.dv1)
        scatter = float(np.std(estimates, ddof=1))
        predicted = float(np.mean(bars))
        assert abs(scatter - predicted) / predicted < 0.30
