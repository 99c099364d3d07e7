import math

import numpy as np
import pytest
from scipy import stats

from syscovar.backtest import (
    CHUNK,
    BacktestCell,
    BacktestReport,
    count_exceedances,
    run_table,
    sample_cloud_export,
    sample_model,
    violation_rate,
)
from syscovar.copulas import Copula, cond_equal_quantile, cond_exceed_cdf, copula_cdf
from syscovar.errors import DomainError
from syscovar.measures import Levels, covar_eq, covar_geq, gaussian_model, gumbel_t_model, student_t_model
from syscovar.reporting import render_csv

L95 = Levels(0.95, 0.95)


def _exact_eq_rate(m, L):
    v = cond_equal_quantile(m.copula, L.alpha, L.beta)
    return 1.0 - cond_exceed_cdf(m.copula, L.alpha, v)


def test_gaussian_independent_sample():
    xy = sample_model(gaussian_model(0.0), 1_000_000, 1)
    assert abs(np.corrcoef(xy.T)[0, 1]) <= 0.004
    assert xy[:, 0].mean() == pytest.approx(0.0, abs=0.005)
    assert xy[:, 1].std() == pytest.approx(1.0, abs=0.005)


def test_t3_kendall_tau():
    xy = sample_model(student_t_model(0.5), 1_000_000, 2)
    tau = stats.kendalltau(xy[:, 0], xy[:, 1])[0]
    assert tau == pytest.approx(2 / math.pi * math.asin(0.5), abs=0.005)


def test_t3_margins():
    xy = sample_model(student_t_model(0.3, mu_y=2.0, sigma_y=3.0), 200_000, 3)
    assert stats.kstest(xy[:, 0], "t", args=(3,)).pvalue > 1e-4
    assert stats.kstest((xy[:, 1] - 2.0) / 3.0, "t", args=(3,)).pvalue > 1e-4


def test_gumbel_joint_exceedance():
    m = gumbel_t_model(3.0)
    n = 1_000_000
    xy = sample_model(m, n, 4)
    q = stats.t.ppf(0.95, 3)
    p = 1 - 2 * 0.95 + copula_cdf(Copula.gumbel(3.0), 0.95, 0.95)
    hit = np.mean((xy[:, 0] > q) & (xy[:, 1] > q))
    assert abs(hit - p) <= 3 * math.sqrt(p * (1 - p) / n)
    assert stats.kstest(xy[:100_000, 1], "t", args=(3,)).pvalue > 1e-4


def test_sample_is_seed_deterministic():
    m = gumbel_t_model(2.0)
    a = sample_model(m, 5000, 17)
    np.testing.assert_array_equal(a, sample_model(m, 5000, 17))
    assert not np.array_equal(a, sample_model(m, 5000, 18))


@pytest.mark.parametrize("m", [gaussian_model(0.5), gumbel_t_model(2.0)], ids=["direct", "copula"])
def test_counts_agree_with_exported_sample_across_blocks(m):
    n = CHUNK + 12_345
    thr = covar_geq(m, L95)
    r = violation_rate(BacktestCell(m, L95, "geq", thr, n, 21))
    xy = sample_model(m, n, 21)
    hit = xy[:, 0] >= m.marginal_x.value_at_risk(0.95)
    assert r.conditioning_count == pytest.approx(hit.sum(), abs=2)
    assert r.joint_count == pytest.approx(np.sum(hit & (xy[:, 1] >= thr)), abs=2)


def test_count_exceedances_against_numpy():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, 100_000))
    thr = np.array([-1.0, 0.0, 1.5, 9.0])
    cond, joint = count_exceedances(x, y, 1.0, thr)
    assert cond == np.sum(x >= 1.0)
    np.testing.assert_array_equal(joint, [np.sum((x >= 1.0) & (y >= t)) for t in thr])
    # ties count as exceedances
    cond, joint = count_exceedances(np.array([1.0, 0.5]), np.array([2.0, 2.0]), 1.0, np.array([2.0]))
    assert (cond, int(joint[0])) == (1, 1)


@pytest.mark.parametrize("m", [gaussian_model(0.9), student_t_model(0.7), gumbel_t_model(2.0)],
                         ids=["gauss", "t3", "gumbel"])
def test_geq_rate_matches_one_minus_beta(m):
    r = violation_rate(BacktestCell(m, L95, "geq", covar_geq(m, L95), 1_000_000, 5))
    assert abs(r.violation_rate - 0.05) <= 4 * r.std_error
    assert abs(r.conditioning_count - 50_000) <= 5 * math.sqrt(1_000_000 * 0.05 * 0.95)
    assert 0 <= r.violation_rate <= 1
    assert r.rng_algorithm == "PCG64"


def test_eq_rate_gaussian_published_cell():
    m = gaussian_model(0.9)
    r = violation_rate(BacktestCell(m, L95, "eq", covar_eq(m, L95), 1_000_000, 6))
    assert abs(r.violation_rate - 0.2520) <= 4 * r.std_error + 0.001
    assert abs(r.violation_rate - _exact_eq_rate(m, L95)) <= 4 * r.std_error


def test_gumbel_theta_one_is_independence():
    m = gumbel_t_model(1.0)
    assert covar_eq(m, L95) == pytest.approx(covar_geq(m, L95), abs=1e-10)
    r = violation_rate(BacktestCell(m, L95, "eq", covar_eq(m, L95), 1_000_000, 7))
    assert abs(r.violation_rate - 0.05) <= 4 * r.std_error


def test_report_reproducible():
    m = student_t_model(0.5)
    cell = BacktestCell(m, L95, "eq", covar_eq(m, L95), 300_000, 8)
    assert violation_rate(cell) == violation_rate(cell)


def test_standard_error_scales_with_n():
    m = gaussian_model(0.5)
    thr = covar_geq(m, L95)
    a = violation_rate(BacktestCell(m, L95, "geq", thr, 400_000, 9))
    b = violation_rate(BacktestCell(m, L95, "geq", thr, 1_600_000, 9))
    assert a.std_error / b.std_error == pytest.approx(2.0, rel=0.2)


def test_zero_conditioning_count_is_an_error():
    m = gaussian_model(0.5)
    seed = next(s for s in range(100) if sample_model(m, 1, s)[0, 0] < 1.6)
    with pytest.raises(DomainError):
        violation_rate(BacktestCell(m, L95, "geq", 1.0, 1, seed))


@pytest.mark.parametrize("kwargs", [dict(variant="le"), dict(n=0), dict(threshold=math.inf)])
def test_cell_validation(kwargs):
    base = dict(model=gaussian_model(0.5), levels=L95, variant="geq", threshold=1.0, n=10, seed=1)
    base.update(kwargs)
    with pytest.raises(DomainError):
        BacktestCell(**base)


def test_run_table_shape_and_order():
    levels = [Levels(0.95, 0.95), Levels(0.99, 0.99), Levels(0.95, 0.99), Levels(0.99, 0.95)]
    reports = run_table("gaussian", [0.0, 0.2, 0.5, 0.7, 0.9], levels, 20_000, 42)
    assert len(reports) == 40
    keys = [r.sort_key for r in reports]
    assert keys == sorted(keys)
    assert len({r.seed for r in reports}) == 5


def test_run_table_cell_matches_standalone_cell():
    # the printed seed regenerates the cell on its own
    (r,) = run_table("t3", [0.2, 0.7], [L95], 100_000, 3, variants=("eq",))[1:]
    m = student_t_model(0.7)
    alone = violation_rate(BacktestCell(m, L95, "eq", covar_eq(m, L95), 100_000, r.seed, "t3", 0.7))
    assert alone == r


def test_run_table_csv_deterministic():
    args = ("gumbel_t3", [1.0, 2.0], [L95, Levels(0.99, 0.95)], 50_000, 11)
    a = render_csv([r.record() for r in run_table(*args)], BacktestReport.COLUMNS, float_format="%.6g")
    b = render_csv([r.record() for r in run_table(*args)], BacktestReport.COLUMNS, float_format="%.6g")
    assert a == b
    assert a.splitlines()[0] == ("family,param,alpha,beta,variant,n,seed,conditioning_count,"
                                 "joint_count,violation_rate,std_error")


def test_eq_rate_increases_along_grid():
    reports = run_table("t3", [0.0, 0.9], [L95], 1_000_000, 13, variants=("eq",))
    lo, hi = reports
    assert hi.violation_rate - lo.violation_rate > 4 * math.hypot(lo.std_error, hi.std_error)


def test_cloud_export(tmp_path):
    m = gaussian_model(0.5)
    path = tmp_path / "cloud.csv"
    th = sample_cloud_export(m, 2000, L95, 1, path)
    lines = path.read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "x,y" and len(body) == 2001
    assert th["var_x"] == pytest.approx(stats.norm.ppf(0.95), abs=1e-12)
    assert {"var_x", "covar_eq", "covar_geq"} <= {ln[2:].split(":")[0] for ln in lines if ln.startswith("#")}
    sample_cloud_export(m, 1, L95, 1, path)
    assert len([ln for ln in path.read_text().splitlines() if not ln.startswith("#")]) == 2
    th = sample_cloud_export(student_t_model(0.9), 10, L95, 1, path)
    assert th["covar_eq"] < th["covar_geq"]


def test_cloud_export_bad_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        sample_cloud_export(gaussian_model(0.5), 5, L95, 1, tmp_path / "nope" / "x.csv")
