import numpy as np
import pytest

from twinpi.data import DataError
from twinpi.stats import (
    ScoreTable,
    compute_report,
    format_report,
    friedman,
    load_score_csv,
    nemenyi_cd,
    rank_rows,
    significance_table,
)

# Published benchmark RMSE of six regression models on 12 synthetic noise
# scenarios (rows) used as a ranking fixture; lower is better.
SYNTHETIC_RMSE_TABLE = np.array([
    [0.1341, 0.1329, 0.1347, 0.1310, 0.1440, 0.1264],
    [0.1431, 0.1397, 0.1419, 0.1428, 0.1430, 0.1298],
    [0.1974, 0.1951, 0.1990, 0.1908, 0.1947, 0.1928],
    [0.1045, 0.1025, 0.1053, 0.1040, 0.1301, 0.0979],
    [0.1047, 0.1023, 0.1052, 0.1022, 0.1034, 0.0963],
    [0.1433, 0.1401, 0.1421, 0.1424, 0.1439, 0.1301],
    [0.1997, 0.1970, 0.2009, 0.1934, 0.1986, 0.1918],
    [0.1042, 0.1008, 0.1043, 0.1027, 0.1301, 0.0973],
    [0.1452, 0.1432, 0.1445, 0.1422, 0.1443, 0.1411],
    [0.1425, 0.1397, 0.1414, 0.1415, 0.1432, 0.1299],
    [0.1957, 0.1914, 0.1948, 0.1875, 0.1921, 0.1878],
    [0.1050, 0.1019, 0.1053, 0.1051, 0.1319, 0.0993],
])
SYNTHETIC_AVG_RANKS = [4.83, 2.58, 4.75, 2.67, 5.0, 1.17]


def test_rank_single_row():
    table = ScoreTable(np.array([[0.1, 0.3, 0.2], [0.5, 0.6, 0.4]]))
    ranks, _ = rank_rows(table)
    np.testing.assert_array_equal(ranks[0], [1.0, 3.0, 2.0])


def test_rank_ties_get_average_positions():
    table = ScoreTable(np.array([[0.1, 0.1, 0.2], [0.3, 0.2, 0.1]]))
    ranks, _ = rank_rows(table)
    np.testing.assert_array_equal(ranks[0], [1.5, 1.5, 3.0])


def test_rank_higher_better_direction():
    table = ScoreTable(np.array([[0.9, 0.1], [0.8, 0.2]]), direction="higher_better")
    ranks, avg = rank_rows(table)
    np.testing.assert_array_equal(avg, [1.0, 2.0])


def test_rank_rows_sum_to_constant():
    rng = np.random.default_rng(0)
    table = ScoreTable(rng.normal(size=(9, 5)))
    ranks, _ = rank_rows(table)
    np.testing.assert_allclose(ranks.sum(axis=1), np.full(9, 15.0), atol=1e-9)


def test_benchmark_fixture_average_ranks():
    ranks, avg = rank_rows(ScoreTable(SYNTHETIC_RMSE_TABLE))
    np.testing.assert_allclose(avg, SYNTHETIC_AVG_RANKS, atol=0.05)


def test_friedman_synthetic_golden_values():
    fr = friedman(SYNTHETIC_AVG_RANKS, n=12, l=6)
    assert fr.chi2_f == pytest.approx(43.0135, abs=0.01)
    assert fr.f_f == pytest.approx(27.8544, abs=0.01)
    assert fr.chi2_dof == 5
    assert fr.f_dof == (5, 55)


def test_friedman_real_world_golden_values():
    fr = friedman([2.43, 4.1, 2.81, 4.0, 5.52, 2.14], n=21, l=6)
    assert fr.chi2_f == pytest.approx(48.9660, abs=0.01)
    assert fr.f_f == pytest.approx(17.4772, abs=0.01)


def test_friedman_null_case_is_zero():
    l, n = 6, 10
    fr = friedman([(l + 1) / 2.0] * l, n=n, l=l)
    assert fr.chi2_f == pytest.approx(0.0, abs=1e-9)


def test_friedman_degenerate_denominator_flagged():
    # maximally spread ranks over few datasets push chi2 past n (l - 1)
    fr = friedman([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], n=2, l=6)
    assert fr.degenerate
    assert fr.f_f is None


def test_friedman_invariant_to_column_order():
    ranks = [2.43, 4.1, 2.81, 4.0, 5.52, 2.14]
    a = friedman(ranks, n=21, l=6)
    b = friedman(list(reversed(ranks)), n=21, l=6)
    assert a.chi2_f == pytest.approx(b.chi2_f, rel=1e-12)


def test_friedman_validation():
    with pytest.raises(ValueError, match="l >= 2"):
        friedman([1.0], n=5, l=1)
    with pytest.raises(ValueError, match="average ranks"):
        friedman([1.0, 2.0], n=5, l=3)


def test_nemenyi_golden_values():
    assert nemenyi_cd(6, 12, 2.850) == pytest.approx(2.1767, abs=0.0005)
    assert nemenyi_cd(6, 21, 2.850) == pytest.approx(1.6454, abs=0.0005)


def test_nemenyi_quadruple_datasets_halves_cd():
    assert nemenyi_cd(6, 48, 2.850) == pytest.approx(nemenyi_cd(6, 12, 2.850) / 2.0, rel=1e-12)


def test_significance_pairs():
    cd = 2.1767
    assert significance_table([1.17, 5.0], cd)[0, 1]
    assert not significance_table([1.17, 5.0], cd)[0, 0]
    assert not significance_table([1.17, 2.58], cd)[0, 1]


def test_significance_matrix_symmetric_false_diagonal():
    sig = significance_table([1.0, 2.5, 6.0, 3.3], cd=1.5)
    np.testing.assert_array_equal(sig, sig.T)
    assert not sig.diagonal().any()


def test_time_series_ranks_golden_values():
    fr = friedman([3.55, 2.2, 3.6, 5.9, 3.9, 1.85], n=10, l=6)
    assert fr.chi2_f == pytest.approx(29.5571, abs=0.01)
    assert fr.f_f == pytest.approx(13.0126, abs=0.01)


def test_compute_report_end_to_end():
    table = ScoreTable(
        SYNTHETIC_RMSE_TABLE,
        model_names=tuple(f"m{i}" for i in range(6)),
        dataset_names=tuple(f"d{i}" for i in range(12)),
    )
    report = compute_report(table, q_alpha=2.850, f_critical=2.3828)
    assert report.reject_null is True
    assert report.cd == pytest.approx(2.1767, abs=0.0005)
    text = format_report(report)
    assert "reject" in text and "cd" in text


def test_score_csv_round_trip(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("dataset,a,b\nd1,0.1,0.2\nd2,0.4,0.3\n")
    table = load_score_csv(path)
    assert table.model_names == ("a", "b")
    assert table.dataset_names == ("d1", "d2")
    np.testing.assert_array_equal(table.scores, [[0.1, 0.2], [0.4, 0.3]])


def test_score_csv_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("dataset,a,b\nd1,0.1\nd2,0.4,0.3\n")
    with pytest.raises(DataError, match="cells"):
        load_score_csv(path)
    path.write_text("dataset,a,b\nd1,x,0.2\nd2,0.4,0.3\n")
    with pytest.raises(DataError, match="non-numeric"):
        load_score_csv(path)


def test_score_table_validation():
    with pytest.raises(ValueError, match="at least 2"):
        ScoreTable(np.array([[1.0, 2.0]]))
    with pytest.raises(ValueError, match="direction"):
        ScoreTable(np.ones((2, 2)), direction="sideways")
