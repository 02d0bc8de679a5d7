"""Acceptance gate: runs the full analytic verification suite once and
asserts every check individually, so a failure names the exact guarantee
that broke. The suite itself reruns every check with identical seeds to
confirm the serialized report is byte-identical (the final test).
"""

import pytest

from unlearn_forge.verify import run_suite


@pytest.fixture(scope="module")
def suite():
    report = run_suite(full=True, reproducibility=True)
    by_name = {r.name: r for r in report.results}
    return report, by_name


def _assert_check(by_name, name):
    res = by_name[name]
    assert res.passed, (
        f"{name} failed with margin {res.margin:.3e}: {res.details}")
    print(f"{name}: PASS (margin {res.margin:+.3e})")


def test_01_quadratic_rcd_exactness(suite):
    _, by_name = suite
    res = by_name["rcd_exact_quadratic"]
    assert abs(res.details["rcd_value"] - 22.0 / 7.0) < 1e-6
    _assert_check(by_name, "rcd_exact_quadratic")


def test_02_curvature_bound_on_random_quadratics(suite):
    _, by_name = suite
    res = by_name["rcd_curvature_bound"]
    assert res.details["count"] == 50
    _assert_check(by_name, "rcd_curvature_bound")


def test_03_exponential_tail_rate(suite):
    _, by_name = suite
    _assert_check(by_name, "rcd_tail_decay")


def test_04_geometric_decay_and_gradient_dominance(suite):
    _, by_name = suite
    _assert_check(by_name, "geometric_decay_and_pl")


def test_05_spectral_accuracy(suite):
    _, by_name = suite
    res = by_name["spectral_accuracy"]
    assert res.details["kappa_is_exact_ratio"]
    _assert_check(by_name, "spectral_accuracy")


def test_06_reinit_process_stationary_law(suite):
    _, by_name = suite
    _assert_check(by_name, "irp_stationary_law")


def test_07_condition_number_trends(suite):
    _, by_name = suite
    res = by_name["condition_number_trends"]
    assert res.details["seeds"] >= 100
    assert res.details["train_p"] < 0.05
    assert res.details["irp_p"] < 0.05
    _assert_check(by_name, "condition_number_trends")


def test_08_method_limit_identities(suite):
    _, by_name = suite
    res = by_name["method_limit_identities"]
    assert res.details["ft_equals_full_update_limit"]
    assert res.details["rl_equals_full_mask_saliency"]
    _assert_check(by_name, "method_limit_identities")


def test_09_desk_scale_ordering(suite):
    _, by_name = suite
    res = by_name["desk_scale_ordering"]
    rcd = res.details["mean_rcd"]
    gap = res.details["mean_avg_gap"]
    assert rcd["retrain"] > rcd["rl"] > rcd["ft"]
    assert gap["ieu"] <= gap["rl"]
    _assert_check(by_name, "desk_scale_ordering")


def test_10_mia_brute_force_equivalence(suite):
    _, by_name = suite
    res = by_name["mia_brute_force_equivalence"]
    assert res.details["mismatches"] == 0
    _assert_check(by_name, "mia_brute_force_equivalence")


def test_11_retain_loss_bound_monitor(suite):
    _, by_name = suite
    _assert_check(by_name, "retain_bound_monitor")


def test_12_byte_identical_reruns(suite):
    report, by_name = suite
    assert report.byte_identical is True
    _assert_check(by_name, "reproducibility")
