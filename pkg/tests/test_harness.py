import csv
import io
import math

import numpy as np
import pytest

from convfy import harness
from convfy.harness import (
    TRACE_HEADER,
    bound_record,
    fisher_check,
    grad_check,
    make_fy,
    minimize_risk,
    parse_task,
    property_check,
    sample_simplex,
    train_synthetic,
    verify_bounds,
    write_trace,
)


class TestParseTask:
    def test_known(self):
        assert parse_task("multiclass:4").kind == "zero_one"
        assert parse_task("hamming:3").N == 8
        assert parse_task("topk:5:2").N == 10

    @pytest.mark.parametrize("task", ["foo:3", "multiclass", "multiclass:x",
                                      "topk:5", "matrix:", "matrix:/nonexistent.csv"])
    def test_unknown(self, task):
        with pytest.raises(ValueError):
            parse_task(task)

    def test_matrix_file(self, tmp_path):
        p = tmp_path / "abs.csv"
        p.write_text("0,1,2\n1,0,1\n2,1,0\n")
        loss = parse_task(f"matrix:{p}")
        assert (loss.K, loss.N) == (3, 3)


def test_sample_simplex_floor():
    rng = np.random.default_rng(0)
    for _ in range(100):
        eta = sample_simplex(rng, 5, 0.01)
        assert eta.min() >= 0.01 and eta.sum() == pytest.approx(1.0)


class TestVerify:
    def test_multiclass_shannon(self):
        rep = verify_bounds("multiclass:4", "shannon", 1000, 0)
        assert rep.violations == 0
        assert rep.max_ratio <= 1 + 1e-9

    def test_hamming_sparse(self):
        rep = verify_bounds("hamming:3", "sqnorm", 1000, 0, link="sparse")
        assert rep.passed
        assert {r.bound_constant for r in rep.records} == {4.0}
        assert all(r.support <= 4 for r in rep.records)

    def test_bayes_optimum_not_a_violation(self):
        fy = make_fy("multiclass:2", "shannon", 1e-9)
        rec = bound_record(fy, np.zeros(2), np.array([0.5, 0.5]))
        assert rec.surrogate_regret == pytest.approx(0, abs=1e-12)
        assert rec.target_regret == 0
        assert not rec.violated and rec.ratio is None

    def test_reproducible(self):
        a = verify_bounds("topk:4:2", "sqnorm", 30, 5, link="random").to_dict(True)
        b = verify_bounds("topk:4:2", "sqnorm", 30, 5, link="random").to_dict(True)
        assert a == b

    def test_schema_order(self):
        d = verify_bounds("multiclass:3", "sqnorm", 5, 1).to_dict(include_records=True)
        assert list(d) == ["task", "entropy", "link", "trials", "seed",
                           "violations", "max_ratio", "records"]
        assert {"surrogate_regret", "target_regret", "bound_constant",
                "ratio", "violated"} <= set(d["records"][0])

    def test_ratio_helper(self):
        assert harness._ratio(0.0, 0.0, 3) is None
        assert harness._ratio(1.0, 0.0, 3) == math.inf
        assert harness._ratio(1.0, 1.0, 2) == 0.5

    def test_bad_link(self):
        with pytest.raises(ValueError):
            verify_bounds("multiclass:3", "shannon", 1, 0, link="median")


class TestGradCheck:
    def test_multiclass(self):
        assert grad_check("multiclass:5", "shannon", 100, 0).passed

    def test_hamming(self):
        assert grad_check("hamming:3", "sqnorm", 100, 0).passed

    def test_coarse_step_degrades(self):
        fine = grad_check("multiclass:3", "shannon", 20, 0, step=1e-5)
        coarse = grad_check("multiclass:3", "shannon", 20, 0, step=1e-1)
        assert coarse.max_rel_error > fine.max_rel_error

    def test_bad_step(self):
        with pytest.raises(ValueError):
            grad_check("multiclass:3", "shannon", 1, 0, step=0.0)


class TestPropertyCheck:
    def test_multiclass(self):
        rep = property_check("multiclass:3", "shannon", 1000, 0)
        assert rep.passed
        assert set(rep.suites) == {"convexity", "lipschitz", "nonnegativity",
                                   "decomposition", "lower_bound", "vertex_dominance"}

    @pytest.mark.slow
    def test_topk(self):
        assert property_check("topk:5:2", "sqnorm", 1000, 0).passed

    def test_single_sample(self):
        assert property_check("multiclass:3", "shannon", 1, 0).passed


class TestFisher:
    def test_multiclass(self):
        rep = fisher_check("multiclass:3", "shannon", 20, 0)
        assert rep.passed and rep.failures == 0

    def test_uniform_zero_steps(self):
        fy = make_fy("multiclass:3", "shannon", 1e-13)
        theta, gn, it = minimize_risk(fy, np.full(3, 1 / 3))
        assert it == 0 and gn <= 1e-8
        np.testing.assert_array_equal(theta, 0)

    def test_nonconvergence_fails_run(self):
        rep = fisher_check("multiclass:3", "shannon", 3, 0, gd_steps=1)
        assert rep.failures == 3 and not rep.passed


class TestTrain:
    def test_regret_decreases(self):
        trace = train_synthetic("multiclass:3", "shannon", 500, 5, 200, 0.5, 0)
        assert len(trace) == 201
        assert trace[-1].mean_target_regret < trace[0].mean_target_regret
        assert trace[-1].mean_surrogate_regret < 0.5 * trace[0].mean_surrogate_regret
        for row in trace:
            assert row.mean_target_regret <= 3 * row.mean_surrogate_regret + 1e-9

    def test_zero_lr_constant(self):
        trace = train_synthetic("multiclass:3", "shannon", 50, 3, 5, 0.0, 1)
        first = trace[0]
        for row in trace[1:]:
            assert (row.mean_surrogate_regret, row.mean_target_regret, row.grad_norm) == (
                first.mean_surrogate_regret, first.mean_target_regret, first.grad_norm)

    def test_csv(self, tmp_path):
        out = tmp_path / "trace.csv"
        trace = train_synthetic("multiclass:3", "sqnorm", 40, 3, 4, 0.5, 0, out_path=out)
        rows = list(csv.reader(out.open()))
        assert tuple(rows[0]) == TRACE_HEADER
        assert len(rows) == 6
        assert float(rows[-1][1]) == trace[-1].mean_surrogate_regret
        buf = io.StringIO()
        write_trace(trace, buf)
        assert buf.getvalue() == out.read_text()

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            train_synthetic("multiclass:3", "shannon", 0, 3, 4)

    def test_io_error(self, tmp_path):
        with pytest.raises(OSError):
            train_synthetic("multiclass:3", "shannon", 10, 2, 1,
                            out_path=tmp_path / "missing" / "t.csv")
