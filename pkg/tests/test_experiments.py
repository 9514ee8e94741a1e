import numpy as np
import pytest

from mmo.channel import ExpCorrModel
from mmo.config import Experiment, ExperimentConfig
from mmo.experiments import CSV_HEADER, aggregate, relative_gap, rows_to_csv, run_experiment


def _cfg(exp, **kw):
    kw.setdefault("snr_db_grid", (0, 20))
    kw.setdefault("trials", 3)
    return ExperimentConfig(exp, **kw)


def test_csv_schema():
    text = rows_to_csv(run_experiment(_cfg(Experiment.BOUND_GAP)))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "snr_db,metric,mean,stderr,trials,seed"
    metrics = {l.split(",")[1] for l in lines[1:]}
    assert {"lower_eig1", "upper_eig4", "rel_gap"} <= metrics
    for line in lines[1:]:
        f = line.split(",")
        for x in (f[0], f[2], f[3]):
            assert x == format(float(x), ".12g")


@pytest.mark.parametrize("exp", [e for e in Experiment if e is not Experiment.SOLVE])
def test_single_trial_is_byte_identical(exp):
    cfg = _cfg(exp, trials=1, seed=11)
    assert rows_to_csv(run_experiment(cfg)) == rows_to_csv(run_experiment(cfg))


def test_bound_gap_ordering_on_means():
    rows = run_experiment(_cfg(Experiment.BOUND_GAP, trials=40, snr_db_grid=(0, 10, 20, 30)))
    by = {(r.snr_db, r.metric): r.mean for r in rows}
    for snr in (0, 10, 20, 30):
        for i in range(1, 5):
            assert by[(snr, f"upper_eig{i}")] >= by[(snr, f"lower_eig{i}")] - 1e-12


def test_sum_mse_compare_overlap():
    # alpha_t = 0 makes Psi proportional to I, where the closed form is exact
    cfg = _cfg(Experiment.SUM_MSE_COMPARE, trials=3, snr_db_grid=(0, 10, 20),
               model=ExpCorrModel(0.0, 0.6, 0.01), iter_max=5000, iter_tol=1e-14)
    by = {(r.snr_db, r.metric): r.mean for r in run_experiment(cfg)}
    for snr in (0, 10, 20):
        assert by[(snr, "sum_mse_lower")] == pytest.approx(by[(snr, "sum_mse_iterative")], rel=1e-5)


def test_unknown_experiment_rejected():
    with pytest.raises(ValueError):
        run_experiment(_cfg(Experiment.SOLVE))


def test_aggregate_and_gap():
    assert aggregate([1.0, 3.0]) == pytest.approx((2.0, 1.0))
    assert aggregate([5.0]) == (5.0, 0.0)
    assert relative_gap(np.array([1.0, 0.0, 2.0]), np.array([1.1, 0.0, 2.2])) == pytest.approx(0.1)
