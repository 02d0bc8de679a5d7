import json

import numpy as np
import pytest

from unlearn_forge.checkpoints import Checkpoint
from unlearn_forge.datasets import gen_blobs, split_random, split_objective
from unlearn_forge.metrics import (
    rcd,
    rcd_bound,
    mia_threshold_attack,
    mia_score,
    eval_report,
)
from unlearn_forge.models import make_quadratic, logistic_spec
from unlearn_forge.numcore import derive_stream, kaiming_sample
from unlearn_forge.training import OptimizerConfig, train, retrain_oracle


def _adaptive_cfg():
    return OptimizerConfig(kind="gd_adaptive", eta=1.0, max_epochs=1)


def test_rcd_geometric_series_value():
    obj = make_quadratic([4.0, 1.0], np.zeros(2), 0.0)
    rep = rcd(np.array([1.0, 1.0]), obj, 0.0, 200, _adaptive_cfg(), "loss",
              derive_stream(0, 0))
    assert rep.rcd_value == pytest.approx(22.0 / 7.0, abs=1e-9)
    assert rep.curvature_bound == pytest.approx(10.0, rel=1e-6)
    assert len(rep.errors) == 201
    assert rep.step_mode == "adaptive_inv_lambda_max"


def test_rcd_zero_at_optimum():
    obj = make_quadratic([4.0, 1.0], np.zeros(2), 0.0)
    rep = rcd(np.zeros(2), obj, 0.0, 10, _adaptive_cfg(), "loss",
              derive_stream(1, 0))
    assert rep.rcd_value == 0.0


def test_rcd_finite_tail_formula():
    obj = make_quadratic([4.0, 1.0], np.zeros(2), 0.0)
    rep = rcd(np.array([1.0, 1.0]), obj, 0.0, 10, _adaptive_cfg(), "loss",
              derive_stream(2, 0))
    tail = 22.0 / 7.0 - rep.rcd_value
    assert tail == pytest.approx(0.5 * 0.5625 ** 11 / 0.4375, rel=1e-9)


def test_rcd_negative_k_rejected():
    obj = make_quadratic([4.0, 1.0], np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        rcd(np.zeros(2), obj, 0.0, -1, _adaptive_cfg(), "loss", derive_stream(3, 0))


def test_rcd_report_serialization(tmp_path):
    obj = make_quadratic([4.0, 1.0], np.zeros(2), 0.0)
    rep = rcd(np.array([1.0, 1.0]), obj, 0.0, 5, _adaptive_cfg(), "loss",
              derive_stream(4, 0))
    payload = rep.to_dict()
    assert json.dumps(payload, sort_keys=True)  # JSON-safe
    assert payload["rcd_value"] == pytest.approx(sum(payload["errors"]))
    path = tmp_path / "rcd.csv"
    rep.to_csv(path)
    assert len(path.read_text().strip().splitlines()) == 7


def test_rcd_bound_forms():
    obj = make_quadratic([4.0, 1.0], np.zeros(2), 0.0)
    theta = np.array([1.0, 1.0])
    assert rcd_bound(theta, obj, 0.0, rng=derive_stream(5, 0)) == pytest.approx(10.0, rel=1e-6)
    assert rcd_bound(theta, obj, 0.0, mu=1.0, beta=4.0) == pytest.approx(10.0)
    # isotropic: bound collapses to the gap itself
    iso = make_quadratic([2.0, 2.0], np.zeros(2), 0.0)
    gap = iso.value(theta)
    assert rcd_bound(theta, iso, 0.0, rng=derive_stream(6, 0)) == pytest.approx(gap, rel=1e-6)


def test_mia_separable_losses():
    member = np.array([0.1, 0.2, 0.3])
    nonmember = np.array([1.0, 2.0, 3.0])
    res = mia_threshold_attack(member, nonmember, np.array([0.15, 2.5]))
    assert res.balanced_accuracy == 1.0
    assert res.forget_member_rate == 0.5


def test_mia_tie_breaks_to_smallest_threshold():
    member = np.array([1.0, 1.0])
    nonmember = np.array([1.0, 1.0])
    res = mia_threshold_attack(member, nonmember, member)
    # indistinguishable: accuracy 0.5 everywhere, smallest candidate wins
    assert res.balanced_accuracy == 0.5
    assert res.threshold == 0.0


def test_mia_empty_view_rejected():
    with pytest.raises(ValueError):
        mia_threshold_attack(np.array([]), np.array([1.0]), np.array([1.0]))


@pytest.fixture(scope="module")
def trained_world():
    ds = split_random(gen_blobs(40, 3, 4, separation=3.0, noise_sd=1.0, seed=21),
                      0.3, seed=21)
    spec = logistic_spec(4, 3)
    cfg = OptimizerConfig(kind="adam", eta=0.05, max_epochs=60)
    obj = split_objective(ds, spec, "train")
    trace = train(obj, kaiming_sample(spec.param_count, derive_stream(21, 5)),
                  cfg, derive_stream(21, 6))
    ckpt = Checkpoint(role="original", spec=spec, config=cfg.to_dict(),
                      root_seed=21, theta=trace.theta)
    return ckpt, ds, cfg


def test_mia_score_rate_in_unit_interval(trained_world):
    ckpt, ds, _ = trained_world
    res = mia_score(ckpt.theta,
                    split_objective(ds, ckpt.spec, "retain"),
                    split_objective(ds, ckpt.spec, "test"),
                    split_objective(ds, ckpt.spec, "forget"))
    assert 0.0 <= res.forget_member_rate <= 1.0
    assert 0.5 <= res.balanced_accuracy <= 1.0


def test_eval_report_and_gaps(trained_world):
    ckpt, ds, cfg = trained_world
    ref_ck = retrain_oracle(ds, ckpt.spec, cfg, seed=21)
    ref = eval_report(ref_ck, ds)
    rep = eval_report(ckpt, ds, ref)
    for v in rep.accuracies.values():
        assert 0.0 <= v <= 1.0
    assert rep.avg_gap == pytest.approx(np.mean(list(rep.gaps.values())))
    # reference against itself has zero gaps
    self_rep = eval_report(ref_ck, ds, ref)
    assert self_rep.avg_gap == 0.0


def test_eval_report_roundtrip(tmp_path, trained_world):
    ckpt, ds, _ = trained_world
    rep = eval_report(ckpt, ds)
    path = tmp_path / "eval.json"
    rep.save(path)
    from unlearn_forge.metrics import EvalReport

    back = EvalReport.from_dict(json.loads(path.read_text()))
    assert back.accuracies == rep.accuracies
    assert back.mia_rate == rep.mia_rate
