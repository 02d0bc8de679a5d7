"""Optimizers and training loops, plus the retrain / forget-oracle
reference models.

Four update rules are provided: fixed-step gradient descent, gradient
descent with the adaptive step 1/lambda_max re-estimated each epoch,
minibatch SGD with a seeded epoch shuffle, and Adam. Convergence is
declared when the full-batch gradient norm drops below ``grad_norm_tol``;
the finite criterion is recorded in every checkpoint because downstream
metrics treat these models as converged references.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, asdict

import numpy as np

from .checkpoints import Checkpoint
from .datasets import SplitDataset, split_objective
from .models import ModelSpec, Objective
from .numcore import RngStream, derive_stream, kaiming_sample
from .spectral import lambda_max

__all__ = [
    "OptimizerConfig",
    "EpochRecord",
    "TrainTrace",
    "DivergenceError",
    "train",
    "make_stepper",
    "retrain_oracle",
    "forget_oracle",
    "trace_to_csv",
]

DIVERGENCE_FACTOR = 1e6

# stream ids reserved for oracle runs
_STREAM_ORACLE_INIT = 201
_STREAM_ORACLE_TRAIN = 202


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "gd_fixed"  # gd_fixed | gd_adaptive | sgd | adam
    eta: float = 0.1  # ignored by gd_adaptive
    batch_size: int | str = "full"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 100
    grad_norm_tol: float = 1e-8
    spectral_tol: float = 1e-10  # gd_adaptive only
    spectral_max_iter: int = 100_000

    def __post_init__(self):
        if self.kind not in ("gd_fixed", "gd_adaptive", "sgd", "adam"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("adam betas must lie in (0, 1)")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    grad_norm: float
    accuracy: float | None = None
    lambda_max: float | None = None
    eta: float | None = None


@dataclass
class TrainTrace:
    records: list
    theta: np.ndarray
    stop_reason: str  # converged | max_epochs


class _Stepper:
    """Applies one epoch of the configured optimizer; owns any state."""

    def __init__(self, obj: Objective, cfg: OptimizerConfig, rng: RngStream):
        self.obj = obj
        self.cfg = cfg
        self.rng = rng
        self.last_eta = None
        self.last_lambda_max = None
        self._adam_m = None
        self._adam_v = None
        self._adam_t = 0

    def _batches(self):
        n = self.obj.n_examples
        bs = self.cfg.batch_size
        if bs == "full" or self.obj.spec.kind == "quadratic" or bs >= n:
            yield self.obj
            return
        order = self.rng.permutation(n)
        for start in range(0, n, bs):
            yield self.obj.subset(order[start : start + bs])

    def step_epoch(self, theta: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        if cfg.kind == "gd_fixed":
            self.last_eta = cfg.eta
            return theta - cfg.eta * self.obj.gradient(theta)
        if cfg.kind == "gd_adaptive":
            lam, _ = lambda_max(self.obj, theta, cfg.spectral_tol, cfg.spectral_max_iter, self.rng)
            if lam <= 0:
                raise DivergenceError("adaptive step-size needs a positive lambda_max")
            self.last_lambda_max = lam
            self.last_eta = 1.0 / lam
            return theta - self.last_eta * self.obj.gradient(theta)
        if cfg.kind == "sgd":
            self.last_eta = cfg.eta
            for batch in self._batches():
                theta = theta - cfg.eta * batch.gradient(theta)
            return theta
        # adam
        if self._adam_m is None:
            self._adam_m = np.zeros_like(theta)
            self._adam_v = np.zeros_like(theta)
        self.last_eta = cfg.eta
        for batch in self._batches():
            g = batch.gradient(theta)
            self._adam_t += 1
            self._adam_m = cfg.beta1 * self._adam_m + (1 - cfg.beta1) * g
            self._adam_v = cfg.beta2 * self._adam_v + (1 - cfg.beta2) * g * g
            mhat = self._adam_m / (1 - cfg.beta1 ** self._adam_t)
            vhat = self._adam_v / (1 - cfg.beta2 ** self._adam_t)
            theta = theta - cfg.eta * mhat / (np.sqrt(vhat) + cfg.eps)
        return theta


def make_stepper(obj: Objective, cfg: OptimizerConfig, rng: RngStream) -> _Stepper:
    return _Stepper(obj, cfg, rng)


def train(obj: Objective, theta0: np.ndarray, cfg: OptimizerConfig, rng: RngStream) -> TrainTrace:
    """Run the configured optimizer until the gradient norm drops below
    tolerance or the epoch budget runs out. Deterministic given
    ``(theta0, cfg, rng)``."""
    theta = np.array(theta0, dtype=np.float64)
    stepper = make_stepper(obj, cfg, rng)
    records = []
    initial_loss = None
    stop_reason = "max_epochs"
    for epoch in range(cfg.max_epochs + 1):
        loss = obj.value(theta)
        if initial_loss is None:
            initial_loss = loss
        if not np.isfinite(loss) or abs(loss) > DIVERGENCE_FACTOR * max(abs(initial_loss), 1e-300):
            raise DivergenceError(f"loss {loss} diverged at epoch {epoch}")
        grad = obj.gradient(theta)
        gn = float(np.linalg.norm(grad))
        acc = obj.accuracy(theta) if obj.spec.is_classifier else None
        records.append(EpochRecord(epoch=epoch, loss=loss, grad_norm=gn, accuracy=acc,
                                   lambda_max=stepper.last_lambda_max, eta=stepper.last_eta))
        if gn <= cfg.grad_norm_tol:
            stop_reason = "converged"
            break
        if epoch == cfg.max_epochs:
            break
        theta = stepper.step_epoch(theta)
    return TrainTrace(records=records, theta=theta, stop_reason=stop_reason)


def _fresh_init(spec: ModelSpec, seed: int) -> np.ndarray:
    return kaiming_sample(spec.param_count, derive_stream(seed, _STREAM_ORACLE_INIT))


def retrain_oracle(data: SplitDataset, spec: ModelSpec, cfg: OptimizerConfig,
                   seed: int) -> Checkpoint:
    """Exact-unlearning reference: fresh Kaiming init trained on the retain
    set only."""
    if len(data.retain_idx) == 0:
        raise ValueError("retrain oracle needs a non-empty retain set")
    obj = split_objective(data, spec, "retain")
    trace = train(obj, _fresh_init(spec, seed), cfg, derive_stream(seed, _STREAM_ORACLE_TRAIN))
    return Checkpoint(
        role="retrain",
        spec=spec,
        config=cfg.to_dict(),
        root_seed=seed,
        theta=trace.theta,
        extra={"stop_reason": trace.stop_reason, "epochs_run": trace.records[-1].epoch},
    )


def forget_oracle(data: SplitDataset, spec: ModelSpec, cfg: OptimizerConfig, seed: int):
    """Model trained to convergence on the forget set alone, plus the
    reference error value for each supported error-evaluation kind.

    The reference values depend only on (forget set, spec, cfg, seed), never
    on the model under audit; compute once and cache."""
    if len(data.forget_idx) == 0:
        raise ValueError("forget oracle needs a non-empty forget set")
    obj = split_objective(data, spec, "forget")
    trace = train(obj, _fresh_init(spec, seed), cfg, derive_stream(seed, _STREAM_ORACLE_TRAIN))
    phi_ref = {
        "loss": obj.value(trace.theta),
        "one_minus_accuracy": 1.0 - obj.accuracy(trace.theta),
    }
    ckpt = Checkpoint(
        role="forget_oracle",
        spec=spec,
        config=cfg.to_dict(),
        root_seed=seed,
        theta=trace.theta,
        extra={"stop_reason": trace.stop_reason, "phi_ref": phi_ref},
    )
    return ckpt, phi_ref


def trace_to_csv(trace: TrainTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "acc", "grad_norm", "lambda_max", "eta"])
        for r in trace.records:
            writer.writerow([r.epoch, repr(r.loss), "" if r.accuracy is None else repr(r.accuracy),
                             repr(r.grad_norm),
                             "" if r.lambda_max is None else repr(r.lambda_max),
                             "" if r.eta is None else repr(r.eta)])
