"""Feedforward regression network trained with Adam on a relative-L2 objective.

The network maps a time/parameter row (t, mu_1, ..., mu_m) to the vector of
reduced coefficients. All dense layers except the last are followed by a
PReLU activation with one trainable slope per unit. Everything here is plain
numpy: forward, backward, and the optimizer are written out explicitly so the
gradients can be checked against finite differences.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, Diverged, ValidationError, ZeroTargetNorm


@dataclass(frozen=True)
class NetworkSpec:
    """Shape of the regressor: dense widths and where PReLU is applied."""

    input_dim: int
    hidden_count: int
    hidden_width: int
    output_dim: int

    def __post_init__(self):
        for name in ("input_dim", "hidden_count", "hidden_width", "output_dim"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValidationError(f"{name} must be an int, got {v!r}")
        if self.input_dim < 1 or self.hidden_width < 1 or self.output_dim < 1:
            raise ValidationError("layer widths must be positive")
        if self.hidden_count < 0:
            raise ValidationError("hidden_count must be >= 0")

    def layer_dims(self):
        """(fan_in, fan_out) for each dense layer, first to last."""
        dims = [(self.input_dim, self.hidden_width)]
        dims += [(self.hidden_width, self.hidden_width)] * self.hidden_count
        dims += [(self.hidden_width, self.output_dim)]
        return dims


def architecture_for(m: int, n: int, base_b: float = 10.0) -> NetworkSpec:
    """Architecture for regressing n reduced coefficients from (t, mu) with m parameters.

    The input is the m+1 row (t, mu_1, ..., mu_m). Depth follows the output
    count, ceil(log_base(n)) hidden layers and at least one, and the hidden
    width equals n so capacity grows with the size of the reduced basis.
    """
    if m < 0:
        raise ValidationError(f"parameter count must be >= 0, got {m}")
    if n < 1:
        raise ValidationError(f"need at least one output, got {n}")
    if base_b <= 1.0:
        raise ValidationError(f"base_b must exceed 1, got {base_b}")
    if base_b == 10.0:
        raw = math.log10(n)
    else:
        raw = math.log(n) / math.log(base_b)
    hidden = max(1, math.ceil(raw - 1e-9))
    return NetworkSpec(
        input_dim=m + 1,
        hidden_count=hidden,
        hidden_width=n,
        output_dim=n,
    )


def parameter_count(spec: NetworkSpec) -> int:
    """Total trainable scalars: weights, biases, and one PReLU slope per hidden unit."""
    total = 0
    dims = spec.layer_dims()
    for i, (fan_in, fan_out) in enumerate(dims):
        total += fan_in * fan_out + fan_out
        if i < len(dims) - 1:  # every layer but the last carries PReLU slopes
            total += fan_out
    return total


@dataclass
class Layer:
    """One dense layer; ``alpha`` is None on the final (linear) layer."""

    W: np.ndarray
    b: np.ndarray
    alpha: np.ndarray | None


@dataclass
class Network:
    spec: NetworkSpec
    layers: list[Layer]

    @property
    def input_dim(self) -> int:
        return self.spec.input_dim

    @property
    def output_dim(self) -> int:
        return self.spec.output_dim

    def parameters(self) -> list[np.ndarray]:
        """Flat list of parameter arrays, in a fixed traversal order."""
        out = []
        for layer in self.layers:
            out.append(layer.W)
            out.append(layer.b)
            if layer.alpha is not None:
                out.append(layer.alpha)
        return out


def init_glorot(spec: NetworkSpec, seed: int = 0) -> Network:
    """Glorot-uniform weights, zero biases, PReLU slopes started at 0.25."""
    rng = np.random.default_rng(seed)
    dims = spec.layer_dims()
    layers = []
    for i, (fan_in, fan_out) in enumerate(dims):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        b = np.zeros(fan_out)
        alpha = np.full(fan_out, 0.25) if i < len(dims) - 1 else None
        layers.append(Layer(W=W, b=b, alpha=alpha))
    return Network(spec=spec, layers=layers)


def prelu(z: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return np.where(z >= 0.0, z, alpha * z)


def prelu_dz(z: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Derivative wrt the pre-activation; the kink at zero takes the positive branch."""
    return np.where(z >= 0.0, 1.0, alpha)


def prelu_dalpha(z: np.ndarray) -> np.ndarray:
    """Derivative wrt the slope: z on the negative branch, zero elsewhere."""
    return np.where(z < 0.0, z, 0.0)


def _check_inputs(net: Network, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise DimensionMismatch(
            f"expected inputs of shape (batch, {net.input_dim}), got {X.shape}"
        )
    return X


def forward(net: Network, X: np.ndarray) -> np.ndarray:
    """Evaluate the network on a batch of rows."""
    X = _check_inputs(net, X)
    A = X
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        Z = A @ layer.W + layer.b
        A = Z if i == last else prelu(Z, layer.alpha)
    return A


def _forward_cached(net: Network, X: np.ndarray):
    """Forward pass keeping the per-layer inputs and pre-activations for backprop."""
    A = X
    cache = []
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        Z = A @ layer.W + layer.b
        cache.append((A, Z))
        A = Z if i == last else prelu(Z, layer.alpha)
    return A, cache


def weight_penalty(net: Network) -> float:
    """Sum of squared weight-matrix entries; biases and slopes are not penalized."""
    return float(sum(np.sum(layer.W * layer.W) for layer in net.layers))


def relative_l2(preds: np.ndarray, targets: np.ndarray) -> float:
    """sqrt(sum((preds - targets)^2)) / sqrt(sum(targets^2)) over the whole batch."""
    den = math.sqrt(float(np.sum(targets * targets)))
    if den == 0.0:
        raise ZeroTargetNorm("target block has zero norm; relative error undefined")
    num = math.sqrt(float(np.sum((preds - targets) ** 2)))
    return num / den


def loss(preds: np.ndarray, targets: np.ndarray, net: Network | None = None,
         theta: float = 0.0) -> float:
    """Relative-L2 data term plus theta times the squared-weight penalty."""
    value = relative_l2(preds, targets)
    if theta != 0.0:
        if net is None:
            raise ValidationError("theta > 0 requires the network for its penalty term")
        value += theta * weight_penalty(net)
    return value


def backward(net: Network, X: np.ndarray, Y: np.ndarray,
             theta: float = 0.0) -> list[np.ndarray]:
    """Exact gradient of ``loss`` wrt every parameter, ordered like ``net.parameters()``.

    The data term is a quotient of Frobenius norms over the batch, so the
    upstream gradient is (preds - targets) / (num * den). A perfect fit makes
    the numerator vanish; the data gradient is zero there and only the weight
    penalty contributes.
    """
    X = _check_inputs(net, X)
    Y = np.asarray(Y, dtype=float)
    if Y.shape != (X.shape[0], net.output_dim):
        raise DimensionMismatch(
            f"expected targets of shape ({X.shape[0]}, {net.output_dim}), got {Y.shape}"
        )
    preds, cache = _forward_cached(net, X)

    den = math.sqrt(float(np.sum(Y * Y)))
    if den == 0.0:
        raise ZeroTargetNorm("target block has zero norm; relative error undefined")
    diff = preds - Y
    num = math.sqrt(float(np.sum(diff * diff)))
    G = np.zeros_like(preds) if num == 0.0 else diff / (num * den)

    grads_rev = []
    last = len(net.layers) - 1
    for i in range(last, -1, -1):
        layer = net.layers[i]
        A_in, Z = cache[i]
        if i == last:
            Gz = G
        else:
            Gz = G * prelu_dz(Z, layer.alpha)
            grads_rev.append(np.sum(G * prelu_dalpha(Z), axis=0))
        dW = A_in.T @ Gz
        if theta != 0.0:
            dW = dW + 2.0 * theta * layer.W
        grads_rev.append(np.sum(Gz, axis=0))
        grads_rev.append(dW)
        if i > 0:
            G = Gz @ layer.W.T
    return grads_rev[::-1]


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings; the defaults match the reference setup."""

    epochs: int = 100
    batch_size: int = 10
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    amsgrad: bool = True
    theta: float = 0.01
    seed: int = 0
    kfolds: int = 5
    decay_every: int = 0      # epochs between step decays; 0 disables
    decay_factor: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr <= 0.0:
            raise ValidationError(f"lr must be positive, got {self.lr}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValidationError("beta1 and beta2 must lie in [0, 1)")
        if self.theta < 0.0:
            raise ValidationError(f"theta must be >= 0, got {self.theta}")
        if self.kfolds < 2:
            raise ValidationError(f"kfolds must be >= 2, got {self.kfolds}")
        if self.decay_every < 0 or self.decay_factor <= 0.0:
            raise ValidationError("invalid decay settings")


@dataclass
class AdamState:
    """First/second moment accumulators; ``vhat`` is the AMSGrad running maximum."""

    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]
    vhat: list[np.ndarray]

    @classmethod
    def zeros_like(cls, net: Network) -> "AdamState":
        params = net.parameters()
        return cls(
            step=0,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            vhat=[np.zeros_like(p) for p in params],
        )


def adam_step(net: Network, grads: list[np.ndarray], state: AdamState,
              config: TrainConfig, lr: float | None = None) -> None:
    """One in-place Adam/AMSGrad update over every parameter array."""
    params = net.parameters()
    if len(grads) != len(params):
        raise DimensionMismatch(
            f"expected {len(params)} gradient arrays, got {len(grads)}"
        )
    if lr is None:
        lr = config.lr
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    for p, g, m, v, vh in zip(params, grads, state.m, state.v, state.vhat):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_corr = v / (1.0 - b2 ** t)
        if config.amsgrad:
            np.maximum(vh, v_corr, out=vh)
            denom = np.sqrt(vh) + config.eps
        else:
            denom = np.sqrt(v_corr) + config.eps
        p -= lr * m_hat / denom


@dataclass
class TrainReport:
    """Per-epoch history plus summary facts about the fitted network."""

    train_loss: list[float] = field(default_factory=list)
    train_data_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)   # empty when no holdout
    seconds: list[float] = field(default_factory=list)
    parameter_count: int = 0
    e_gen: float | None = None

    @property
    def total_seconds(self) -> float:
        return float(sum(self.seconds))


def train(net: Network, inputs: np.ndarray, outputs: np.ndarray,
          config: TrainConfig, validation_rows: np.ndarray | None = None) -> TrainReport:
    """Minibatch Adam training; mutates ``net`` and returns the loss history.

    ``validation_rows`` marks rows excluded from the gradient updates and
    scored separately each epoch. The recorded training loss is recomputed on
    the full training split after each epoch, not averaged over minibatches.
    """
    inputs = _check_inputs(net, inputs)
    outputs = np.asarray(outputs, dtype=float)
    if outputs.shape != (inputs.shape[0], net.output_dim):
        raise DimensionMismatch(
            f"targets shaped {outputs.shape} do not match "
            f"({inputs.shape[0]}, {net.output_dim})"
        )

    n_rows = inputs.shape[0]
    if validation_rows is None:
        train_rows = np.arange(n_rows)
        val_rows = None
    else:
        val_rows = np.asarray(validation_rows, dtype=int)
        mask = np.ones(n_rows, dtype=bool)
        mask[val_rows] = False
        train_rows = np.flatnonzero(mask)
    if train_rows.size == 0:
        raise ValidationError("no rows left to train on")

    X_tr, Y_tr = inputs[train_rows], outputs[train_rows]
    rng = np.random.default_rng(config.seed)
    state = AdamState.zeros_like(net)
    report = TrainReport(parameter_count=parameter_count(net.spec))
    lr = config.lr

    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        perm = rng.permutation(train_rows.size)
        for start in range(0, perm.size, config.batch_size):
            idx = perm[start:start + config.batch_size]
            grads = backward(net, X_tr[idx], Y_tr[idx], config.theta)
            adam_step(net, grads, state, config, lr)
        if config.decay_every and (epoch + 1) % config.decay_every == 0:
            lr *= config.decay_factor
        elapsed = time.perf_counter() - t0

        data_term = relative_l2(forward(net, X_tr), Y_tr)
        full = data_term + config.theta * weight_penalty(net)
        if not math.isfinite(full):
            raise Diverged(f"training loss became {full} at epoch {epoch + 1}")
        report.train_loss.append(full)
        report.train_data_loss.append(data_term)
        report.seconds.append(elapsed)
        if val_rows is not None:
            val = relative_l2(forward(net, inputs[val_rows]), outputs[val_rows])
            report.val_loss.append(val)
    return report


@dataclass
class CrossValReport:
    """Generalization scores from K-fold rotation, one per candidate spec."""

    e_gen: list[float]
    best_index: int
    candidates: list[NetworkSpec]

    @property
    def best_spec(self) -> NetworkSpec:
        return self.candidates[self.best_index]


def cross_validate(inputs: np.ndarray, outputs: np.ndarray,
                   candidates: list[NetworkSpec], config: TrainConfig,
                   fold_assignment: np.ndarray) -> CrossValReport:
    """Score each candidate by rotating folds and averaging relative errors.

    The score sums the per-fold relative-L2 validation errors and divides by
    the nominal fold size N/K, which matches a plain mean when folds are
    equal-sized and stays well-defined otherwise.
    """
    inputs = np.asarray(inputs, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    if not candidates:
        raise ValidationError("need at least one candidate architecture")
    k_total = int(fold_assignment.max()) + 1
    nominal = inputs.shape[0] / k_total
    scores = []
    for ci, spec in enumerate(candidates):
        total = 0.0
        for k in range(k_total):
            val_rows = np.flatnonzero(fold_assignment == k)
            seed = config.seed + 7919 * ci + 104729 * k
            net = init_glorot(spec, seed=seed)
            fold_cfg = replace(config, seed=seed)
            report = train(net, inputs, outputs, fold_cfg, validation_rows=val_rows)
            total += report.val_loss[-1]
        scores.append(total / nominal)
    best = int(np.argmin(scores))
    return CrossValReport(e_gen=scores, best_index=best, candidates=list(candidates))
