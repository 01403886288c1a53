"""Per-neuron single-qubit channels: rotations, projective and weak measurement.

Conventions
~~~~~~~~~~~

* Activation +1 corresponds to |0>, activation -1 to |1>. A qubit state is
  the real amplitude pair (alpha, beta) with alpha^2 + beta^2 = 1.
* Amplitudes stay real throughout: R_Y(theta) is a real matrix in the
  computational basis, and the weak-measurement update only rescales each
  amplitude by a real factor. Complex storage would be dead weight.
* Each neuron entangles only with its own fresh ancilla, which is measured
  immediately, so the neuron marginal remains a pure single-qubit state.
  The ancilla (prepared in an equal superposition) is never represented:
  its measurement statistics and back-action are applied in closed form.
  No joint state vector is ever materialized.
* Every measurement consumes exactly one uniform draw from the supplied
  generator. A forward pass consumes draws layer-major, neuron index
  ascending. Both facts are reproducibility contracts.

The channel is tuned by two knobs: the activation stretch `a` (a = 0 gives
hard sign targets, so rotation angles are 0 or +-pi and the circuit is
deterministic) and the entanglement angle `g` (g = pi/2 makes the ancilla
measurement equivalent to a projective measurement of the neuron). The
configuration (a=0, g=pi/2) reproduces the classical binarized network
bit-for-bit; to guarantee that exactly, rotations by 0 and +-pi are applied
as exact basis-state maps rather than through cos/sin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import ForwardTrace, BatchTrace, NetworkParams, ShapeMismatch, sign

HALF_PI = np.pi / 2


@dataclass
class QubitState:
    """Real amplitudes of |0> and |1>."""

    alpha: float
    beta: float

    def norm_sq(self) -> float:
        return self.alpha * self.alpha + self.beta * self.beta

    def z_expectation(self) -> float:
        return self.alpha * self.alpha - self.beta * self.beta


KET_0 = QubitState(1.0, 0.0)
KET_1 = QubitState(0.0, 1.0)


@dataclass(frozen=True)
class QuantumConfig:
    """Point on the classical <-> quantum continuum: stretch a, angle g."""

    a: float
    g: float = HALF_PI

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"stretch a must be >= 0, got {self.a}")
        if not 0.0 <= self.g <= HALF_PI:
            raise ValueError(f"entanglement angle g must be in [0, pi/2], got {self.g}")

    @property
    def is_classical(self) -> bool:
        return self.a == 0.0 and self.g == HALF_PI


@dataclass
class MeasurementOutcome:
    d: int
    post_state: QubitState


def phi_a(x, a: float):
    """Stretched activation htanh(x / a); the a -> 0 limit is sign(x)."""
    if a == 0.0:
        return sign(x)
    return np.clip(np.asarray(x, dtype=np.float64) / a, -1.0, 1.0)


def rotation_angle(k: int, d_prev: float, preact: float, a: float) -> float:
    """Rotation angle for a layer-k neuron.

    Layer 1 rotates away from the fresh |0> state (base term 1); deeper
    layers rotate away from the previous measured activation d_prev.
    """
    base = 1.0 if k == 1 else d_prev
    return float(HALF_PI * (base - phi_a(preact, a)))


def ry_update(alpha, beta, theta):
    """Apply R_Y(theta) elementwise to amplitude arrays.

    Angles that are exactly 0 or +-pi are applied as exact basis maps:
    identity, (alpha, beta) -> (-beta, alpha), and (alpha, beta) ->
    (beta, -alpha) respectively. Generic angles use the cos/sin matrix.
    The exact branch is what makes the a=0 circuit reproduce the classical
    network bitwise instead of within 1e-16.
    """
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    out_a = c * alpha - s * beta
    out_b = s * alpha + c * beta
    exact_0 = theta == 0.0
    exact_p = theta == np.pi
    exact_m = theta == -np.pi
    if exact_0.any() or exact_p.any() or exact_m.any():
        out_a = np.where(exact_0, alpha, out_a)
        out_b = np.where(exact_0, beta, out_b)
        out_a = np.where(exact_p, -np.asarray(beta, dtype=np.float64), out_a)
        out_b = np.where(exact_p, alpha, out_b)
        out_a = np.where(exact_m, beta, out_a)
        out_b = np.where(exact_m, -np.asarray(alpha, dtype=np.float64), out_b)
    return out_a, out_b


def projective_update(alpha, beta, u):
    """Projectively measure: d = +1 where u < alpha^2, post-state the basis state."""
    p_plus = np.asarray(alpha) ** 2
    d = np.where(np.asarray(u) < p_plus, 1.0, -1.0)
    out_a = np.where(d > 0, 1.0, 0.0)
    out_b = np.where(d > 0, 0.0, 1.0)
    return d, out_a, out_b


def weak_update(alpha, beta, sin_g, u):
    """Ancilla-mediated weak measurement with entanglement strength sin_g.

    Outcome d = +-1 with probability (1 + d <z> sin_g) / 2 where
    <z> = alpha^2 - beta^2; the surviving amplitudes are rescaled by
    sqrt((1 +- d sin_g) / (1 + d <z> sin_g)). The denominator is twice the
    probability of the sampled outcome, so it is strictly positive.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    z = alpha * alpha - beta * beta
    p_plus = 0.5 * (1.0 + z * sin_g)
    d = np.where(np.asarray(u) < p_plus, 1.0, -1.0)
    denom = 1.0 + d * z * sin_g
    out_a = alpha * np.sqrt((1.0 + d * sin_g) / denom)
    out_b = beta * np.sqrt((1.0 - d * sin_g) / denom)
    return d, out_a, out_b


def apply_ry(state: QubitState, theta: float) -> QubitState:
    """Rotate a single qubit about the y-axis by theta."""
    a, b = ry_update(state.alpha, state.beta, theta)
    return QubitState(float(a), float(b))


def projective_measure(state: QubitState, rng: np.random.Generator) -> MeasurementOutcome:
    """Sample d = +1 with probability alpha^2; collapse to the matching basis state.

    Consumes exactly one uniform draw.
    """
    d, a, b = projective_update(state.alpha, state.beta, rng.random())
    return MeasurementOutcome(d=int(d), post_state=QubitState(float(a), float(b)))


def weak_measure(state: QubitState, g: float, rng: np.random.Generator) -> MeasurementOutcome:
    """Weakly measure via an ancilla entangled at angle g; one uniform draw.

    g = pi/2 reproduces a projective measurement; g = 0 leaves the state
    untouched and returns a fair coin.
    """
    d, a, b = weak_update(state.alpha, state.beta, np.sin(g), rng.random())
    return MeasurementOutcome(d=int(d), post_state=QubitState(float(a), float(b)))


def _check_hidden_widths(params: NetworkParams):
    widths = params.hidden_widths()
    if widths and any(w != widths[0] for w in widths):
        raise ShapeMismatch(
            f"quantum forward reuses one qubit per neuron; hidden widths {widths} differ"
        )


def quantum_forward(
    params: NetworkParams,
    d0: np.ndarray,
    cfg: QuantumConfig,
    rng: np.random.Generator,
) -> ForwardTrace:
    """Forward pass with one qubit per hidden neuron, reused across layers.

    Qubits start in |0>. Per layer: rotate each qubit by the angle computed
    from the previous measured activations, then measure it (projectively
    when g = pi/2, weakly otherwise); the outcomes are the layer's
    activations. Uniform draws are consumed layer-major, neuron ascending.
    """
    d0 = np.asarray(d0, dtype=np.float64)
    if d0.shape[0] != params.input_size:
        raise ShapeMismatch(
            f"input has length {d0.shape[0]}, network expects {params.input_size}"
        )
    _check_hidden_widths(params)
    L = params.num_hidden_layers
    projective = cfg.g == HALF_PI
    sin_g = np.sin(cfg.g)
    z_list, d_list = [], [d0]
    if L:
        n = params.W[0].shape[0]
        alpha = np.ones(n)
        beta = np.zeros(n)
    for k in range(1, L + 1):
        z = params.W[k - 1] @ d_list[k - 1]
        base = 1.0 if k == 1 else d_list[k - 1]
        theta = HALF_PI * (base - phi_a(z, cfg.a))
        alpha, beta = ry_update(alpha, beta, theta)
        u = rng.random(n)
        if projective:
            d, alpha, beta = projective_update(alpha, beta, u)
        else:
            d, alpha, beta = weak_update(alpha, beta, sin_g, u)
        z_list.append(z)
        d_list.append(d)
    f = params.W[-1] @ d_list[-1]
    return ForwardTrace(z=z_list, d=d_list, f=f)


def quantum_forward_batch(
    params: NetworkParams,
    D0: np.ndarray,
    cfg: QuantumConfig,
    sample_rngs,
) -> BatchTrace:
    """Batched quantum_forward over columns of D0 (M, B).

    Column s consumes draws from sample_rngs[s] in exactly the order
    quantum_forward would, so the two paths produce identical activations.
    """
    if D0.shape[0] != params.input_size:
        raise ShapeMismatch(
            f"batch has {D0.shape[0]} features, network expects {params.input_size}"
        )
    _check_hidden_widths(params)
    L = params.num_hidden_layers
    B = D0.shape[1]
    if len(sample_rngs) != B:
        raise ShapeMismatch(f"need {B} sample generators, got {len(sample_rngs)}")
    projective = cfg.g == HALF_PI
    sin_g = np.sin(cfg.g)
    Z_list, D_list = [], [D0]
    if L:
        n = params.W[0].shape[0]
        U = np.empty((L, n, B))
        for s, rng in enumerate(sample_rngs):
            U[:, :, s] = rng.random((L, n))
        alpha = np.ones((n, B))
        beta = np.zeros((n, B))
    for k in range(1, L + 1):
        Z = params.W[k - 1] @ D_list[k - 1]
        base = 1.0 if k == 1 else D_list[k - 1]
        theta = HALF_PI * (base - phi_a(Z, cfg.a))
        alpha, beta = ry_update(alpha, beta, theta)
        if projective:
            D, alpha, beta = projective_update(alpha, beta, U[k - 1])
        else:
            D, alpha, beta = weak_update(alpha, beta, sin_g, U[k - 1])
        Z_list.append(Z)
        D_list.append(D)
    F = params.W[-1] @ D_list[-1]
    return BatchTrace(Z=Z_list, D=D_list, F=F)
