"""SGD-with-momentum training loop with seeded, thread-invariant reproducibility.

The run seed derives every stream the loop touches (see rng.py): weight
init, the per-epoch shuffle, and one generator per (epoch, batch, sample)
for measurement sampling. Gradients are the mean of per-sample gradients
over the mini-batch, reduced in sample order; the weight update is
classical heavy-ball momentum, v <- momentum*v - lr*grad, W <- W + v.

Per-epoch training error is measured with deterministic classical-limit
forward passes. Per-epoch validation error uses the supplied inference
policy (deterministic by default; multi-shot evaluation of every epoch is
expensive and usually reserved for the final model).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import BatchPlan, EncodedDataset
from .inference import InferencePolicy, evaluate, predict_batch_deterministic
from .network import (
    Gradients,
    NetworkParams,
    ShapeMismatch,
    classical_forward_batch,
    init_network_params,
    softmax_cross_entropy_batch,
    ste_backward_batch,
)
from .quantum import QuantumConfig, quantum_forward_batch
from .rng import FORWARD, INIT, SHUFFLE, mix64, substream


class ConfigInvalid(ValueError):
    """A hyperparameter or run-configuration value is unusable."""


@dataclass(frozen=True)
class Hyperparams:
    """Defaults mirror the benchmark configuration (3x512 net, SGD 0.01/0.9)."""

    hidden_layers: int = 3
    hidden_size: int = 512
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 500
    train_size: int = 5000
    val_size: int = 10000
    quantum: QuantumConfig = field(default_factory=lambda: QuantumConfig(a=0.0))
    seed: int = 1
    bp_scale: float = 1.0
    num_classes: int = 10

    def validate(self):
        if self.hidden_layers < 0:
            raise ConfigInvalid(f"hidden_layers must be >= 0, got {self.hidden_layers}")
        if self.hidden_size < 1:
            raise ConfigInvalid(f"hidden_size must be >= 1, got {self.hidden_size}")
        if self.learning_rate <= 0:
            raise ConfigInvalid(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigInvalid(f"momentum must be in [0, 1), got {self.momentum}")
        if self.batch_size < 1:
            raise ConfigInvalid(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigInvalid(f"epochs must be >= 0, got {self.epochs}")
        if self.bp_scale <= 0:
            raise ConfigInvalid(f"bp_scale must be > 0, got {self.bp_scale}")
        if self.num_classes < 2:
            raise ConfigInvalid(f"num_classes must be >= 2, got {self.num_classes}")


@dataclass
class OptimizerState:
    velocity: list

    @classmethod
    def zeros_like(cls, params: NetworkParams) -> "OptimizerState":
        return cls(velocity=[np.zeros_like(w) for w in params.W])


@dataclass
class EpochRecord:
    epoch: int
    train_error: float
    val_error: float
    mean_loss: float


@dataclass
class RunMetrics:
    records: list
    params: NetworkParams


def sgd_momentum_step(
    params: NetworkParams,
    opt: OptimizerState,
    grads: Gradients,
    lr: float,
    momentum: float,
):
    """In-place heavy-ball update; returns (params, opt) for convenience."""
    if len(grads) != len(params.W):
        raise ShapeMismatch(f"{len(grads)} gradients for {len(params.W)} matrices")
    for w, v, g in zip(params.W, opt.velocity, grads):
        if g.shape != w.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} does not match {w.shape}")
        v *= momentum
        v -= lr * g
        w += v
    return params, opt


def training_error(params: NetworkParams, data: EncodedDataset) -> float:
    """Deterministic classical-limit error rate on a dataset."""
    preds = predict_batch_deterministic(params, data.X)
    return float(np.mean(preds != data.y))


def _sample_rngs(seed: int, epoch: int, batch: int, count: int):
    return [substream(seed, FORWARD, epoch, batch, s) for s in range(count)]


def _batch_gradients(params, X, y, cfg, seed, epoch, batch_idx, bp_scale, force_quantum=False):
    D0 = X.T
    if cfg.is_classical and not force_quantum:
        trace = classical_forward_batch(params, D0)
    else:
        rngs = _sample_rngs(seed, epoch, batch_idx, X.shape[0])
        trace = quantum_forward_batch(params, D0, cfg, rngs)
    losses, dF = softmax_cross_entropy_batch(trace.F, y)
    grads = ste_backward_batch(params, trace, dF, bp_scale)
    return grads, losses


def train(
    hyper: Hyperparams,
    train_set: EncodedDataset,
    val_set: EncodedDataset,
    eval_policy: InferencePolicy | None = None,
    on_epoch=None,
    _force_quantum_path: bool = False,
) -> RunMetrics:
    """Train a network from scratch; a pure function of (hyper, datasets).

    `eval_policy` controls the per-epoch validation measurement (default
    deterministic). `on_epoch` is called with each EpochRecord as it is
    produced, e.g. to append to a metrics log. `_force_quantum_path` routes
    classical configurations through the quantum sampler; it exists so the
    classical-limit equality of the two code paths can be tested.
    """
    hyper.validate()
    if train_set.count == 0 and hyper.epochs > 0:
        raise ConfigInvalid("cannot train on an empty dataset")
    if train_set.count and train_set.X.shape[1] != val_set.X.shape[1]:
        raise ShapeMismatch(
            f"train and validation inputs disagree: "
            f"{train_set.X.shape[1]} vs {val_set.X.shape[1]} features"
        )
    if eval_policy is None:
        eval_policy = InferencePolicy.deterministic()
    params = init_network_params(
        input_size=train_set.X.shape[1],
        hidden_size=hyper.hidden_size,
        hidden_layers=hyper.hidden_layers,
        output_size=hyper.num_classes,
        rng=substream(hyper.seed, INIT),
    )
    opt = OptimizerState.zeros_like(params)
    records = []
    for epoch in range(hyper.epochs):
        plan = BatchPlan.make(train_set.count, hyper.batch_size, mix64(hyper.seed, SHUFFLE, epoch))
        loss_sum = 0.0
        for batch_idx, idx in enumerate(plan.batches()):
            grads, losses = _batch_gradients(
                params,
                train_set.X[idx],
                train_set.y[idx],
                hyper.quantum,
                hyper.seed,
                epoch,
                batch_idx,
                hyper.bp_scale,
                force_quantum=_force_quantum_path,
            )
            sgd_momentum_step(params, opt, grads, hyper.learning_rate, hyper.momentum)
            loss_sum += float(losses.sum())
        record = EpochRecord(
            epoch=epoch,
            train_error=training_error(params, train_set),
            val_error=evaluate(params, val_set, eval_policy, quantum=hyper.quantum),
            mean_loss=loss_sum / train_set.count,
        )
        records.append(record)
        if on_epoch is not None:
            on_epoch(record)
    return RunMetrics(records=records, params=params)
