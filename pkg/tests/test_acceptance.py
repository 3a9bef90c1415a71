"""Acceptance suite: every criterion at its stated tolerance.

Each test prints one pass line; run with ``pytest -s tests/test_acceptance.py``
to see them. The random-instance suites draw from the documented ranges
(m in [3, 12], feature counts in [1, 4], regularization weights log-uniform
in [2^-4, 2^4], both kernel kinds) with numerically degenerate draws screened
out by a condition cap.
"""

import math
import time

import numpy as np
import pytest

from support import draw_well_posed, rel_err

from twinpi.bounds import BoundInputs, generalization_bound, rademacher_bound
from twinpi.cli import main
from twinpi.data import PIDataset
from twinpi.metrics import aggregate_mean, evaluate
from twinpi.model import Hyperparams, build_workspace, fit, kkt_residuals, predict
from twinpi.oracle import solve_stacked_kkt
from twinpi.stats import friedman, nemenyi_cd

from test_metrics import BASELINE_RMSE, PROPOSED_RMSE
from test_model import REF_DATA, REF_HP


def _rng(offset=0):
    return np.random.default_rng(20240800 + offset)


def _instances(count, offset):
    """Well-posed random instances alternating the two kernel kinds."""
    rng = _rng(offset)
    out = []
    for i in range(count):
        kind = "rbf" if i % 2 == 0 else "linear"
        out.append(draw_well_posed(rng, kind))
    return out


def test_criterion_1_statistics_golden_values():
    start = time.perf_counter()

    fr = friedman([4.83, 2.58, 4.75, 2.67, 5.0, 1.17], n=12, l=6)
    assert fr.chi2_f == pytest.approx(43.0135, abs=0.01)
    assert fr.f_f == pytest.approx(27.8544, abs=0.01)

    fr = friedman([2.43, 4.1, 2.81, 4.0, 5.52, 2.14], n=21, l=6)
    assert fr.chi2_f == pytest.approx(48.9660, abs=0.01)
    assert fr.f_f == pytest.approx(17.4772, abs=0.01)

    fr = friedman([2.57, 4.19, 2.62, 3.86, 5.48, 2.29], n=21, l=6)
    assert fr.chi2_f == pytest.approx(46.1970, abs=0.01)

    fr = friedman([2.55, 3.93, 3.1, 3.4, 5.76, 2.26], n=21, l=6)
    assert fr.chi2_f == pytest.approx(47.4156, abs=0.01)

    fr = friedman([3.55, 2.2, 3.6, 5.9, 3.9, 1.85], n=10, l=6)
    assert fr.chi2_f == pytest.approx(29.5571, abs=0.01)
    assert fr.f_f == pytest.approx(13.0126, abs=0.01)

    assert nemenyi_cd(6, 12, 2.850) == pytest.approx(2.1767, abs=0.0005)
    assert nemenyi_cd(6, 21, 2.850) == pytest.approx(1.6454, abs=0.0005)

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"\ncriterion 1 PASS: statistics golden values ({elapsed:.3f} s)")


def test_criterion_2_closed_form_matches_stacked_solve():
    instances = _instances(60, offset=2)
    worst = 0.0
    for data, hp in instances:
        model = fit(data, hp)
        ws = build_workspace(data, hp)
        v1, v1_star, alpha = solve_stacked_kkt(ws, data.targets, hp, "down")
        v2, v2_star, beta = solve_stacked_kkt(ws, data.targets, hp, "up")
        for got, want in (
            (model.duals.alpha, alpha), (model.duals.beta, beta),
            (model.v1, v1), (model.v2, v2),
            (model.v1_star, v1_star), (model.v2_star, v2_star),
        ):
            err = rel_err(got, want)
            worst = max(worst, err)
            assert err <= 1e-8
    print(f"criterion 2 PASS: 60 instances, worst blockwise error {worst:.2e} <= 1e-8")


def test_criterion_3_kkt_residuals_for_every_successful_fit():
    instances = _instances(50, offset=3)
    instances.append((REF_DATA, REF_HP))
    rng = _rng(3000)
    instances.extend(draw_well_posed(rng, None) for _ in range(10))
    worst = 0.0
    for data, hp in instances:
        model = fit(data, hp)
        res = kkt_residuals(model, data)
        tol = 1e-8 * (1.0 + float(np.max(np.abs(data.targets))))
        scaled = res.max_residual() / tol
        worst = max(worst, scaled)
        assert res.max_residual() <= tol
    print(f"criterion 3 PASS: 61 fits, worst residual at {worst:.3f} of tolerance")


def test_criterion_4_zero_target_symmetry():
    rng = _rng(4)
    for kind in (None, "rbf"):
        data, hp = draw_well_posed(rng, kind)
        hp = Hyperparams(
            c1=hp.c1, c2=hp.c2, c3=hp.c3, c4=hp.c1, c5=hp.c2, c6=hp.c3,
            eps1=0.01, eps2=0.01, kernel=hp.kernel,
        )
        data = PIDataset(data.regular, data.privileged, np.zeros(data.n_samples))
        model = fit(data, hp)
        assert float(np.max(np.abs(model.v1 + model.v2))) <= 1e-10
        probe = rng.normal(size=(20, data.regular.shape[1]))
        assert float(np.max(np.abs(predict(model, probe)))) <= 1e-10
    print("criterion 4 PASS: zero targets give v2 = -v1 and zero predictions")


def test_criterion_5_row_permutation_invariance():
    rng = _rng(5)
    data, hp = draw_well_posed(rng, "rbf")
    probe = rng.normal(size=(20, data.regular.shape[1]))
    baseline = predict(fit(data, hp), probe)
    worst = 0.0
    for _ in range(10):
        perm = rng.permutation(data.n_samples)
        permuted = PIDataset(data.regular[perm], data.privileged[perm], data.targets[perm])
        delta = float(np.max(np.abs(predict(fit(permuted, hp), probe) - baseline)))
        worst = max(worst, delta)
        assert delta <= 1e-8
    print(f"criterion 5 PASS: 10 permutations, worst prediction shift {worst:.2e}")


def test_criterion_6_metric_identities_and_fixture_averages():
    rng = _rng(6)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        y = rng.normal(size=n) * rng.uniform(0.1, 10)
        y_hat = y + rng.normal(size=n)
        m = evaluate(y, y_hat)
        assert m.rmse**2 * m.n == pytest.approx(m.sse, rel=1e-9, abs=1e-15)
    assert aggregate_mean(PROPOSED_RMSE) == pytest.approx(0.1350, abs=0.0005)
    assert aggregate_mean(BASELINE_RMSE) == pytest.approx(0.1433, abs=0.0005)
    print("criterion 6 PASS: rmse^2 n = sse and fixture averages 0.1350 / 0.1433")


def test_criterion_7_bounds():
    for m in (1, 4, 100):
        for cap in (1.0, 0.5, 3.0):
            assert rademacher_bound(cap, np.ones(m)) == cap / math.sqrt(m)
    rng = _rng(7)
    for _ in range(100):
        m = int(rng.integers(1, 300))
        inp = BoundInputs(
            weight_norm_cap=float(rng.uniform(0.01, 10)),
            lipschitz=float(rng.uniform(0.01, 10)),
            delta=float(rng.uniform(0.001, 0.999)),
            kernel_diag=rng.uniform(0, 4, m),
            empirical_error=float(rng.uniform(0, 5)),
        )
        assert generalization_bound(inp, m) >= inp.empirical_error
    print("criterion 7 PASS: unit-diagonal complexity exact, bound dominates empirical error")


@pytest.fixture(scope="module")
def benchmark_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench") / "run1"
    args = [
        "benchmark", "--synthetic", "f2", "--noise", "uniform_pm02",
        "--repeats", "4", "--n-train", "100", "--n-test", "200",
        "--max-candidates", "64", "--folds", "5", "--seed", "17",
        "--with-krr", "--out", str(out),
    ]
    start = time.perf_counter()
    code = main(args)
    elapsed = time.perf_counter() - start
    return args, out, code, elapsed


def test_criterion_8_end_to_end_benchmark(benchmark_run):
    _, out, code, elapsed = benchmark_run
    assert code == 0
    assert elapsed < 300.0
    lines = (out / "benchmark.csv").read_text().splitlines()
    header = lines[0].split(",")
    row = dict(zip(header, lines[1].split(",")))
    assert row["dataset"] == "f2" and row["status"] == "ok"
    twin_rmse = float(row["twin_rmse"])
    krr_rmse = float(row["krr_rmse"])
    assert np.isfinite(twin_rmse) and twin_rmse < 0.5
    assert twin_rmse <= 1.25 * krr_rmse
    print(
        f"criterion 8 PASS: benchmark in {elapsed:.1f} s, twin rmse {twin_rmse:.4f}, "
        f"ratio to comparator {twin_rmse / krr_rmse:.3f} <= 1.25"
    )


def test_criterion_9_benchmark_determinism(benchmark_run, tmp_path):
    args, out, code, _ = benchmark_run
    assert code == 0
    rerun_out = tmp_path / "run2"
    rerun_args = list(args)
    rerun_args[rerun_args.index("--out") + 1] = str(rerun_out)
    assert main(rerun_args) == 0
    first = (out / "benchmark.csv").read_bytes()
    second = (rerun_out / "benchmark.csv").read_bytes()
    assert first == second
    print("criterion 9 PASS: repeated benchmark runs are byte-identical")
