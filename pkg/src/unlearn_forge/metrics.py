"""Relearning convergence delay, its curvature-based upper bound, the
loss-threshold membership inference score, and per-split evaluation
reports.

The delay metric relearns a model on the forgetting set for K epochs and
sums the per-epoch excess error above the forget-oracle reference:

    rcd_value = sum_{t=0}^{K} [ phi(theta_t) - phi_ref ]

with phi either the mean loss or 1 - accuracy. The reference value comes
from a model trained to convergence on the forgetting set alone and is
independent of the model under audit. The curvature bound
``kappa * (loss_0 - loss_ref)`` is attached only for loss-phi reports and
only when the Hessian estimate is consistent with convexity; for
indefinite Hessians the report carries a diagnostic instead.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .checkpoints import Checkpoint
from .datasets import SplitDataset, split_objective
from .models import Objective
from .numcore import RngStream
from .spectral import SpectralEstimate, estimate_spectrum, condition_number, NON_PSD_DIAGNOSTIC
from .training import OptimizerConfig, make_stepper

__all__ = [
    "RcdReport",
    "EvalReport",
    "MiaResult",
    "rcd",
    "rcd_bound",
    "mia_score",
    "mia_threshold_attack",
    "eval_report",
]

PHI_KINDS = ("loss", "one_minus_accuracy")


@dataclass
class RcdReport:
    K: int
    phi_kind: str
    step_mode: str
    errors: np.ndarray  # e_t for t = 0..K
    rcd_value: float
    phi_ref: float
    curvature_bound: float | None = None
    bound_diagnostic: str | None = None
    spectral: SpectralEstimate | None = None
    tail_estimate: float | None = None
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "phi_kind": self.phi_kind,
            "step_mode": self.step_mode,
            "errors": [float(e) for e in self.errors],
            "rcd_value": self.rcd_value,
            "phi_ref": self.phi_ref,
            "curvature_bound": self.curvature_bound,
            "bound_diagnostic": self.bound_diagnostic,
            "spectral": None if self.spectral is None else self.spectral.to_dict(),
            "tail_estimate": self.tail_estimate,
            "clamped": self.clamped,
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "phi", "e_t", "cumulative"])
            cum = 0.0
            for t, e in enumerate(self.errors):
                cum += e
                writer.writerow([t, repr(e + self.phi_ref), repr(float(e)), repr(cum)])


def _phi(forget_obj: Objective, phi_kind: str):
    if phi_kind == "loss":
        return forget_obj.value
    if phi_kind == "one_minus_accuracy":
        return lambda theta: 1.0 - forget_obj.accuracy(theta)
    raise ValueError(f"unknown phi kind {phi_kind!r}; use one of {PHI_KINDS}")


def rcd(theta0: np.ndarray, forget_obj: Objective, phi_ref: float, K: int,
        relearn_cfg: OptimizerConfig, phi_kind: str, rng: RngStream,
        clamp_at_zero: bool = False, attach_bound: bool = True) -> RcdReport:
    """Relearn on the forgetting set for K epochs and sum the excess error.

    ``relearn_cfg.kind`` selects the relearning schedule: ``gd_fixed`` /
    ``sgd`` for a fixed step, ``gd_adaptive`` for the 1/lambda_max schedule,
    ``adam`` for the Adam-labeled variant.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    phi = _phi(forget_obj, phi_kind)
    theta = np.array(theta0, dtype=np.float64)
    stepper = make_stepper(forget_obj, relearn_cfg, rng)
    errors = np.empty(K + 1)
    errors[0] = phi(theta) - phi_ref
    for t in range(1, K + 1):
        theta = stepper.step_epoch(theta)
        e = phi(theta) - phi_ref
        if not np.isfinite(e):
            raise FloatingPointError(
                f"non-finite relearning error at epoch {t}: phi={e + phi_ref}"
            )
        errors[t] = e
    if clamp_at_zero:
        errors = np.maximum(errors, 0.0)
    step_mode = relearn_cfg.kind if relearn_cfg.kind != "gd_adaptive" else "adaptive_inv_lambda_max"
    report = RcdReport(
        K=K,
        phi_kind=phi_kind,
        step_mode=step_mode,
        errors=errors,
        rcd_value=float(errors.sum()),
        phi_ref=phi_ref,
        clamped=clamp_at_zero,
    )
    if attach_bound and phi_kind == "loss":
        bound, diag, est = _bound_from_spectrum(np.asarray(theta0, dtype=np.float64),
                                                forget_obj, phi_ref, rng)
        report.curvature_bound = bound
        report.bound_diagnostic = diag
        report.spectral = est
    return report


def _bound_from_spectrum(theta0, forget_obj, loss_ref, rng):
    est = estimate_spectrum(forget_obj, theta0, rng=rng)
    kappa = condition_number(est)
    if isinstance(kappa, str):
        return None, kappa, est
    gap = forget_obj.value(theta0) - loss_ref
    return float(kappa * gap), None, est


def rcd_bound(theta: np.ndarray, forget_obj: Objective, loss_ref: float,
              rng: RngStream | None = None, mu: float | None = None,
              beta: float | None = None):
    """Curvature bound on the delay metric: kappa times the loss gap.

    When global smoothness/strong-convexity constants are supplied, the
    looser global form ``(beta/mu) * gap`` is used instead of the local
    spectral estimate. Returns a float or a diagnostic string.
    """
    gap = forget_obj.value(theta) - loss_ref
    if mu is not None and beta is not None:
        if mu <= 0:
            return "mu must be positive for the global bound"
        return float((beta / mu) * gap)
    bound, diag, _ = _bound_from_spectrum(theta, forget_obj, loss_ref, rng or RngStream(0, 7))
    return bound if diag is None else diag


# ---------------------------------------------------------------------------
# membership inference


@dataclass
class MiaResult:
    threshold: float
    balanced_accuracy: float
    forget_member_rate: float


def mia_threshold_attack(member_losses: np.ndarray, nonmember_losses: np.ndarray,
                         audit_losses: np.ndarray) -> MiaResult:
    """Loss-threshold attack: pick the threshold maximizing balanced
    accuracy at separating members from non-members (rule: member iff loss
    <= threshold), then report the audited examples' member rate.

    Candidate thresholds are the midpoints of the sorted pooled losses plus
    both extremes; ties in balanced accuracy resolve to the smallest
    threshold.
    """
    if len(member_losses) == 0 or len(nonmember_losses) == 0 or len(audit_losses) == 0:
        raise ValueError("all three loss views must be non-empty")
    pooled = np.sort(np.concatenate([member_losses, nonmember_losses]))
    mids = (pooled[:-1] + pooled[1:]) / 2.0
    candidates = np.concatenate([[pooled[0] - 1.0], mids, [pooled[-1] + 1.0]])
    best_tau, best_acc = candidates[0], -1.0
    for tau in candidates:
        tpr = np.mean(member_losses <= tau)
        tnr = np.mean(nonmember_losses > tau)
        acc = 0.5 * (tpr + tnr)
        if acc > best_acc:
            best_acc, best_tau = acc, tau
    return MiaResult(
        threshold=float(best_tau),
        balanced_accuracy=float(best_acc),
        forget_member_rate=float(np.mean(audit_losses <= best_tau)),
    )


def mia_score(theta: np.ndarray, retain_obj: Objective, test_obj: Objective,
              forget_obj: Objective) -> MiaResult:
    """Attack on per-example losses: retain = members, test = non-members,
    forget examples audited."""
    return mia_threshold_attack(
        retain_obj.per_example_loss(theta),
        test_obj.per_example_loss(theta),
        forget_obj.per_example_loss(theta),
    )


# ---------------------------------------------------------------------------
# evaluation reports


@dataclass
class EvalReport:
    accuracies: dict  # split name -> accuracy
    mia_rate: float
    gaps: dict = field(default_factory=dict)  # metric -> |this - reference|
    avg_gap: float | None = None
    rcd_value: float | None = None

    def metrics(self) -> dict:
        out = dict(self.accuracies)
        out["mia"] = self.mia_rate
        return out

    def to_dict(self) -> dict:
        return {
            "accuracies": self.accuracies,
            "mia_rate": self.mia_rate,
            "gaps": self.gaps,
            "avg_gap": self.avg_gap,
            "rcd_value": self.rcd_value,
        }

    @staticmethod
    def from_dict(d: dict) -> "EvalReport":
        return EvalReport(accuracies=d["accuracies"], mia_rate=d["mia_rate"],
                          gaps=d.get("gaps", {}), avg_gap=d.get("avg_gap"),
                          rcd_value=d.get("rcd_value"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")


def eval_report(ckpt: Checkpoint, data: SplitDataset,
                reference: EvalReport | None = None) -> EvalReport:
    """Per-split accuracies plus the membership-inference rate; when a
    retrain reference is given, absolute per-metric gaps and their mean."""
    theta = ckpt.theta
    splits = ["retain", "forget", "test"]
    if data.forgotten_classes:
        splits += ["test_retain", "test_forget"]
    accs = {}
    for which in splits:
        try:
            accs[which] = split_objective(data, ckpt.spec, which).accuracy(theta)
        except ValueError:
            accs[which] = None  # empty split half
    mia = mia_score(
        theta,
        split_objective(data, ckpt.spec, "retain"),
        split_objective(data, ckpt.spec, "test"),
        split_objective(data, ckpt.spec, "forget"),
    )
    report = EvalReport(accuracies=accs, mia_rate=mia.forget_member_rate)
    if reference is not None:
        mine, ref = report.metrics(), reference.metrics()
        gaps = {
            k: abs(mine[k] - ref[k])
            for k in sorted(mine)
            if mine.get(k) is not None and ref.get(k) is not None
        }
        report.gaps = gaps
        report.avg_gap = float(np.mean(list(gaps.values())))
    return report
