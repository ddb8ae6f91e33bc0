import numpy as np
import pytest

from uisearch.nn import ops
from uisearch.nn.gradcheck import (
    GradCheckReport,
    finite_diff_check,
    run_fragment_checks,
    run_labelnet_checks,
    run_op_checks,
)


class TestFiniteDiffCheck:
    def test_linear_fragment_near_exact(self):
        x = np.random.default_rng(0).random(16)
        report = finite_diff_check(
            "linear", lambda t: float(np.sum(t)), x, np.ones_like(x), tolerance=1e-10
        )
        assert report.passed
        assert report.max_rel_error < 1e-10

    def test_wrong_gradient_fails(self):
        x = np.random.default_rng(1).random(8)
        report = finite_diff_check(
            "bad", lambda t: float(np.sum(t * t)), x, np.zeros_like(x), tolerance=1e-3
        )
        assert not report.passed

    def test_quadratic_matches(self):
        x = np.random.default_rng(2).standard_normal(12)
        report = finite_diff_check(
            "quad", lambda t: float(np.sum(t * t)), x, 2 * x, tolerance=1e-6
        )
        assert report.passed


def _assert_all_pass(reports):
    failed = [r for r in reports if not r.passed]
    assert not failed, "failed: " + ", ".join(
        f"{r.name}({r.max_rel_error:.2e})" for r in failed
    )


def test_op_suite_passes():
    _assert_all_pass(run_op_checks(seed=0))


def test_fragment_suite_passes():
    reports = run_fragment_checks(seed=0)
    names = {r.name for r in reports}
    assert "frag:conv_relu_pool_mse.x" in names
    assert "frag:dice_on_positive.x" in names
    _assert_all_pass(reports)


def test_labelnet_suite_covers_all_parameters():
    reports = run_labelnet_checks(seed=0)
    assert len(reports) == 12  # 6 layers x (w, b)
    _assert_all_pass(reports)


def test_corrupt_hook_fails_suite():
    reports = run_op_checks(seed=0)
    first = reports[0]
    corrupted = GradCheckReport(first.name, first.max_rel_error + 1.0, first.tolerance)
    assert not corrupted.passed
