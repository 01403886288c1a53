"""Validation-time prediction policies: deterministic and multi-shot mode.

Deterministic inference runs the classical-limit forward pass once and
takes the argmax. Multi-shot mode inference runs the stochastic forward
`shots` times and returns the most common prediction; ties (argmax and
mode alike) resolve to the lowest class index so results are
implementation-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EncodedDataset
from .network import NetworkParams, classical_forward, classical_forward_batch
from .quantum import QuantumConfig, quantum_forward, quantum_forward_batch
from .rng import EVAL, substream

_EVAL_CHUNK = 512
_SEED_HIGH = 1 << 64


class EmptyDataset(ValueError):
    """Evaluation was asked for an empty dataset."""


@dataclass(frozen=True)
class InferencePolicy:
    mode: str = "multi_shot"
    shots: int = 15
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("deterministic", "multi_shot"):
            raise ValueError(f"unknown inference mode {self.mode!r}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    @classmethod
    def deterministic(cls) -> "InferencePolicy":
        return cls(mode="deterministic", shots=1, seed=0)

    @classmethod
    def multi_shot(cls, shots: int = 15, seed: int = 0) -> "InferencePolicy":
        return cls(mode="multi_shot", shots=shots, seed=seed)


def predict_deterministic(params: NetworkParams, x: np.ndarray) -> int:
    """Argmax of the classical-limit output; ties go to the lowest class."""
    return int(np.argmax(classical_forward(params, x).f))


def modal_class(preds, num_classes: int) -> int:
    """Most common prediction; ties resolve to the lowest class index."""
    counts = np.bincount(np.asarray(preds, dtype=np.int64), minlength=num_classes)
    return int(np.argmax(counts))


def _shot_seeds(rng: np.random.Generator, shots: int) -> np.ndarray:
    # one uint64 word per shot, consumed in shot order
    return rng.integers(0, _SEED_HIGH, size=shots, dtype=np.uint64)


def predict_mode(
    params: NetworkParams,
    x: np.ndarray,
    cfg: QuantumConfig,
    shots: int,
    rng: np.random.Generator,
) -> int:
    """Modal argmax over `shots` stochastic forward passes.

    Each shot runs on its own child generator seeded from one uint64 draw,
    so shot j is reproducible independently of the others.
    """
    seeds = _shot_seeds(rng, shots)
    preds = [
        int(np.argmax(quantum_forward(params, x, cfg, np.random.default_rng(int(s))).f))
        for s in seeds
    ]
    return modal_class(preds, params.output_size)


def predict_batch_deterministic(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    """Deterministic class predictions for rows of X (n, M)."""
    out = np.empty(len(X), dtype=np.int64)
    for start in range(0, len(X), _EVAL_CHUNK):
        F = classical_forward_batch(params, X[start : start + _EVAL_CHUNK].T).F
        out[start : start + _EVAL_CHUNK] = np.argmax(F, axis=0)
    return out


def prediction_matrix(
    params: NetworkParams,
    data: EncodedDataset,
    cfg: QuantumConfig,
    shots: int,
    seed: int,
) -> np.ndarray:
    """(n, shots) stochastic predictions with per-(sample, shot) substreams.

    Sample i's shot seeds are the uint64 draws of substream(seed, EVAL, i),
    exactly what predict_mode consumes given that generator; column j of a
    row therefore reproduces that sample's j-th shot. Sorting or batching
    the samples differently cannot change the matrix.
    """
    n = data.count
    seeds = np.empty((n, shots), dtype=np.uint64)
    for i in range(n):
        seeds[i] = _shot_seeds(substream(seed, EVAL, i), shots)
    preds = np.empty((n, shots), dtype=np.int64)
    for start in range(0, n, _EVAL_CHUNK):
        stop = min(start + _EVAL_CHUNK, n)
        D0 = data.X[start:stop].T
        for j in range(shots):
            rngs = [np.random.default_rng(int(s)) for s in seeds[start:stop, j]]
            F = quantum_forward_batch(params, D0, cfg, rngs).F
            preds[start:stop, j] = np.argmax(F, axis=0)
    return preds


def mode_over_shots(preds: np.ndarray, num_classes: int) -> np.ndarray:
    """Row-wise modal class of a (n, shots) prediction matrix."""
    n, shots = preds.shape
    counts = np.zeros((n, num_classes), dtype=np.int64)
    rows = np.arange(n)
    for j in range(shots):
        np.add.at(counts, (rows, preds[:, j]), 1)
    return np.argmax(counts, axis=1)


def evaluate(
    params: NetworkParams,
    data: EncodedDataset,
    policy: InferencePolicy,
    quantum: QuantumConfig | None = None,
) -> float:
    """Fraction of samples whose prediction differs from the label."""
    if data.count == 0:
        raise EmptyDataset("cannot evaluate an empty dataset")
    if policy.mode == "deterministic":
        preds = predict_batch_deterministic(params, data.X)
    else:
        if quantum is None:
            raise ValueError("multi_shot evaluation needs a QuantumConfig")
        matrix = prediction_matrix(params, data, quantum, policy.shots, policy.seed)
        preds = mode_over_shots(matrix, params.output_size)
    return float(np.mean(preds != data.y))
