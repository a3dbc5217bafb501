"""Amortized explainer: a small MLP trained to output Shapley values directly.

Two training objectives are provided.  The single-pass route regresses the
network onto sampled unbiased targets phi_hat in a metric norm
||g - phi_hat||^2_M (identity metric by default); the weighted-subset route
minimizes E_S[(v(S) - v(empty) - g^T 1^S)^2] over kernel-distributed subsets
with additive efficient normalization folded into the forward pass.  Both
optimize the same ideal output: for any positive-definite metric the
unconstrained minimizer is the mean target, so mean-zero target noise only
shifts the loss by a constant, never the optimum.

Everything is plain numpy: forward, backward, SGD and decoupled-weight-decay
Adam are written out so gradients can be checked against finite differences.
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from shapx.core import (
    Attribution,
    CoalitionGame,
    ConfigError,
    RandomSource,
    bits_to_indicators,
)
from shapx.exact import shapley_kernel_gram
from shapx.stochastic import kernel_normalizer, sample_kernel_batch, simshap_target

WIDE_INPUT_THRESHOLD = 16  # inputs wider than this get 512-unit hidden layers


class TrainingError(RuntimeError):
    """Training diverged or produced non-finite values."""


@dataclass
class ExplainerNet:
    """Feedforward net x -> (d, n_classes) attribution matrix.

    ``widths`` runs (input, hidden..., d * n_classes); weights[k] has shape
    (widths[k], widths[k+1]).  ``normalize_inference`` marks nets trained with
    the constrained objective, whose predictions must be shifted onto the
    efficiency hyperplane at inference time.
    """

    widths: tuple
    weights: list
    biases: list
    activation: str
    d: int
    n_classes: int
    normalize_inference: bool = False

    def __post_init__(self):
        if self.activation not in ("relu", "elu"):
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.widths[-1] != self.d * self.n_classes:
            raise ConfigError(
                f"output width {self.widths[-1]} != d * n_classes = {self.d * self.n_classes}"
            )

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameter_count(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


def build_explainer(
    n_features: int,
    d: int,
    n_classes: int = 1,
    rng: Union[RandomSource, int] = 0,
    hidden: Optional[int] = None,
    depth: int = 3,
    activation: str = "relu",
) -> ExplainerNet:
    """Fresh explainer with uniform fan-in initialization.

    Hidden width defaults to 128 for narrow inputs and 512 past
    ``WIDE_INPUT_THRESHOLD`` features.
    """
    if hidden is None:
        hidden = 128 if n_features <= WIDE_INPUT_THRESHOLD else 512
    if isinstance(rng, int):
        rng = RandomSource(rng)
    gen = rng.generator()
    widths = (n_features,) + (hidden,) * depth + (d * n_classes,)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(gen.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(gen.uniform(-bound, bound, size=fan_out))
    return ExplainerNet(
        widths=widths, weights=weights, biases=biases, activation=activation, d=d,
        n_classes=n_classes,
    )


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    return np.where(z > 0, z, np.expm1(z))


def _activate_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0).astype(np.float64)
    return np.where(z > 0, 1.0, np.exp(z))


def _forward_pass(net: ExplainerNet, x_batch: np.ndarray):
    """Returns (output, pre-activations per layer, activations per layer)."""
    pre, act = [], [x_batch]
    h = x_batch
    last = net.n_layers - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if k == last else _activate(z, net.activation)
        act.append(h)
    return h, pre, act


def forward(net: ExplainerNet, x: np.ndarray) -> np.ndarray:
    """Single-input forward pass -> (d, n_classes) matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.widths[0],):
        raise ValueError(f"input must have shape ({net.widths[0]},), got {x.shape}")
    out, _, _ = _forward_pass(net, x[None, :])
    return out.reshape(net.d, net.n_classes)


def forward_batch(net: ExplainerNet, x_batch: np.ndarray) -> np.ndarray:
    """Batched forward pass -> (n, d, n_classes)."""
    x_batch = np.asarray(x_batch, dtype=np.float64)
    if x_batch.ndim != 2 or x_batch.shape[1] != net.widths[0]:
        raise ValueError(f"batch must have shape (n, {net.widths[0]}), got {x_batch.shape}")
    out, _, _ = _forward_pass(net, x_batch)
    return out.reshape(x_batch.shape[0], net.d, net.n_classes)


def _backward_pass(net: ExplainerNet, pre, act, grad_out: np.ndarray):
    """Gradients of sum(loss) given d loss / d output; mirrors _forward_pass."""
    grads_w = [None] * net.n_layers
    grads_b = [None] * net.n_layers
    delta = grad_out
    for k in range(net.n_layers - 1, -1, -1):
        grads_w[k] = act[k].T @ delta
        grads_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ net.weights[k].T) * _activate_grad(pre[k - 1], net.activation)
    return grads_w, grads_b


@dataclass(frozen=True)
class MetricMatrix:
    """Metric M for the regression norm ||g - phi||^2_M.

    Kinds: "identity"; "shapley_lsv" (the closed-form kernel Gram
    ((d-1)/d) I + B J, no enumeration); "explicit" with user entries
    (validated positive semi-definite on construction).
    """

    kind: str
    d: int
    explicit: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("identity", "shapley_lsv", "explicit"):
            raise ConfigError(f"unknown metric kind {self.kind!r}")
        if self.kind == "explicit":
            if self.explicit is None:
                raise ConfigError("explicit metric needs entries")
            mat = np.asarray(self.explicit, dtype=np.float64)
            if mat.shape != (self.d, self.d):
                raise ConfigError(f"metric must be ({self.d}, {self.d}), got {mat.shape}")
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ConfigError("metric must be symmetric")
            if np.linalg.eigvalsh(mat).min() < -1e-10:
                raise ConfigError("metric must be positive semi-definite")
            object.__setattr__(self, "explicit", mat)
        elif self.kind == "shapley_lsv" and self.d < 2:
            raise ConfigError("shapley_lsv metric needs d >= 2")

    def matrix(self) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(self.d)
        if self.kind == "shapley_lsv":
            return shapley_kernel_gram(self.d)
        return self.explicit

    def apply(self, residual: np.ndarray) -> np.ndarray:
        """M @ r for an (n, d) batch of residuals (rowwise)."""
        if self.kind == "identity":
            return residual
        return residual @ self.matrix().T


@dataclass
class TrainConfig:
    """Hyperparameters shared by both training loops."""

    learning_rate: float = 2e-3
    batch_size: int = 128
    epochs: int = 100
    samples_per_input: int = 64
    paired: bool = True
    optimizer: str = "adamw"
    seed: int = 0
    weight_decay: float = 0.0
    schedule: str = "constant"
    validation_fraction: float = 0.1
    patience: Optional[int] = None
    supervise_all_classes: bool = False
    divergence_factor: float = 1e3

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.samples_per_input < 1:
            raise ConfigError("samples_per_input must be >= 1")
        if self.paired and self.samples_per_input % 2:
            raise ConfigError("paired sampling needs an even samples_per_input")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be >= 1")
        if self.optimizer not in ("sgd", "adamw"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.schedule not in ("constant", "cosine"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if not 0 <= self.validation_fraction < 1:
            raise ConfigError("validation_fraction must be in [0, 1)")

    def lr_at(self, epoch: int) -> float:
        if self.schedule == "cosine":
            return self.learning_rate * 0.5 * (1 + np.cos(np.pi * epoch / max(1, self.epochs)))
        return self.learning_rate


class OptimizerState:
    """Per-parameter slots for the configured update rule."""

    def __init__(self, net: ExplainerNet, cfg: TrainConfig):
        self.kind = cfg.optimizer
        self.weight_decay = cfg.weight_decay
        self.step_count = 0
        if self.kind == "adamw":
            self.m_w = [np.zeros_like(w) for w in net.weights]
            self.v_w = [np.zeros_like(w) for w in net.weights]
            self.m_b = [np.zeros_like(b) for b in net.biases]
            self.v_b = [np.zeros_like(b) for b in net.biases]

    def step(self, net: ExplainerNet, grads_w, grads_b, lr: float):
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        self.step_count += 1
        if self.kind == "sgd":
            for k in range(net.n_layers):
                net.weights[k] -= lr * grads_w[k]
                net.biases[k] -= lr * grads_b[k]
                if self.weight_decay:
                    net.weights[k] -= lr * self.weight_decay * net.weights[k]
            return
        t = self.step_count
        corr1 = 1 - beta1**t
        corr2 = 1 - beta2**t
        for k in range(net.n_layers):
            for params, grads, m, v in (
                (net.weights, grads_w, self.m_w, self.v_w),
                (net.biases, grads_b, self.m_b, self.v_b),
            ):
                m[k] = beta1 * m[k] + (1 - beta1) * grads[k]
                v[k] = beta2 * v[k] + (1 - beta2) * grads[k] ** 2
                update = (m[k] / corr1) / (np.sqrt(v[k] / corr2) + eps)
                params[k] -= lr * update
                if self.weight_decay:
                    # decoupled decay: applied to the parameter, not the gradient
                    params[k] -= lr * self.weight_decay * params[k]


def _select_class_columns(out: np.ndarray, classes: np.ndarray, d: int, k: int) -> np.ndarray:
    """(n, d*k) raw outputs -> (n, d) attributions of each row's labeled class."""
    g = out.reshape(-1, d, k)
    return g[np.arange(g.shape[0]), :, classes]


def metric_loss_and_gradients(
    net: ExplainerNet,
    x_batch: np.ndarray,
    targets: np.ndarray,
    classes: np.ndarray,
    metric: MetricMatrix,
):
    """Mean metric-norm regression loss over a batch, with parameter gradients.

    Only the labeled class's attribution column receives gradient.
    """
    x_batch = np.asarray(x_batch, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if not np.all(np.isfinite(targets)):
        raise TrainingError("non-finite training targets")
    n = x_batch.shape[0]
    out, pre, act = _forward_pass(net, x_batch)
    g = _select_class_columns(out, classes, net.d, net.n_classes)
    residual = g - targets
    m_res = metric.apply(residual)
    loss = float((residual * m_res).sum() / n)
    grad_g = 2.0 * m_res / n
    grad_out = np.zeros_like(out).reshape(n, net.d, net.n_classes)
    grad_out[np.arange(n), :, classes] = grad_g
    grads_w, grads_b = _backward_pass(net, pre, act, grad_out.reshape(n, -1))
    return loss, grads_w, grads_b


def weighted_subset_loss(
    g: np.ndarray,
    indicators: np.ndarray,
    v_delta: np.ndarray,
    weights: Optional[np.ndarray] = None,
) -> float:
    """sum_k w_k (v_delta_k - g^T 1^{S_k})^2; mean over k when no weights.

    With explicit kernel weights and a full subset enumeration this is the
    classic weighted regression objective; during training the weights are
    implicit in the sampling distribution and the plain mean is used.
    """
    residual = v_delta - indicators @ g
    if weights is None:
        return float(np.mean(residual**2))
    return float(np.sum(weights * residual**2))


def metric_form_loss(g: np.ndarray, target: np.ndarray, metric: MetricMatrix) -> float:
    """(g - target)^T M (g - target) for a single attribution vector."""
    r = g - target
    return float(r @ metric.matrix() @ r)


def fastshap_loss_and_gradients(
    net: ExplainerNet,
    x_batch: np.ndarray,
    indicator_batches: np.ndarray,
    v_delta_batches: np.ndarray,
    v_alls: np.ndarray,
    classes: np.ndarray,
    normalize: bool,
):
    """Weighted-subset regression loss with optional in-graph normalization.

    ``indicator_batches`` is (n, M, d) and ``v_delta_batches`` (n, M).  When
    ``normalize`` is set, predictions are shifted onto the efficiency
    hyperplane before the residuals, and the shift is backpropagated
    (Jacobian I - J/d, i.e. gradients get mean-centered).
    """
    x_batch = np.asarray(x_batch, dtype=np.float64)
    n, m_sub, d = indicator_batches.shape
    out, pre, act = _forward_pass(net, x_batch)
    g = _select_class_columns(out, classes, net.d, net.n_classes)
    if normalize:
        g_eff = g - g.mean(axis=1, keepdims=True) + (v_alls / d)[:, None]
    else:
        g_eff = g
    residual = v_delta_batches - np.einsum("nmd,nd->nm", indicator_batches, g_eff)
    loss = float((residual**2).sum() / (n * m_sub))
    grad_geff = -2.0 * np.einsum("nm,nmd->nd", residual, indicator_batches) / (n * m_sub)
    if normalize:
        grad_g = grad_geff - grad_geff.mean(axis=1, keepdims=True)
    else:
        grad_g = grad_geff
    grad_out = np.zeros_like(out).reshape(n, net.d, net.n_classes)
    grad_out[np.arange(n), :, classes] = grad_g
    grads_w, grads_b = _backward_pass(net, pre, act, grad_out.reshape(n, -1))
    return loss, grads_w, grads_b


def backward_and_step(
    net: ExplainerNet,
    x_batch: np.ndarray,
    targets: np.ndarray,
    classes: np.ndarray,
    metric: MetricMatrix,
    cfg: TrainConfig,
    opt_state: OptimizerState,
    lr: Optional[float] = None,
) -> float:
    """One optimization step on the metric regression loss; returns the
    pre-update loss."""
    loss, grads_w, grads_b = metric_loss_and_gradients(net, x_batch, targets, classes, metric)
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite loss (seed={cfg.seed}, lr={cfg.learning_rate})")
    opt_state.step(net, grads_w, grads_b, cfg.learning_rate if lr is None else lr)
    return loss


def additive_efficient_normalization(phi_raw: np.ndarray, v_all: float) -> np.ndarray:
    """Shift onto the efficiency hyperplane: phi - mean(phi) + v_all/d.

    Idempotent, and the closest efficient vector in l2.
    """
    phi_raw = np.asarray(phi_raw, dtype=np.float64)
    return phi_raw - phi_raw.mean() + v_all / phi_raw.shape[-1]


def quadratic_metric_minimizer(targets: np.ndarray) -> np.ndarray:
    """argmin_g sum_k ||g - t_k||^2_M for any positive-definite M: the mean.

    The metric scales the objective but not the stationary point, which is why
    mean-zero target noise leaves the trained optimum unchanged.
    """
    return np.asarray(targets, dtype=np.float64).mean(axis=0)


def _split_dataset(n: int, fraction: float, rng: RandomSource):
    gen = rng.generator()
    order = gen.permutation(n)
    n_val = int(round(n * fraction))
    return order[n_val:], order[:n_val]


def _resolve_dataset(dataset):
    if hasattr(dataset, "X") and hasattr(dataset, "y"):
        return np.asarray(dataset.X, dtype=np.float64), np.asarray(dataset.y)
    x, y = dataset
    return np.asarray(x, dtype=np.float64), np.asarray(y)


GameFactory = Callable[[np.ndarray, int], CoalitionGame]


def _check_divergence(loss: float, initial: float, cfg: TrainConfig, epoch: int):
    if not np.isfinite(loss) or (initial > 0 and loss > cfg.divergence_factor * initial):
        raise TrainingError(
            f"training diverged at epoch {epoch}: loss={loss:.3e} vs initial {initial:.3e} "
            f"(seed={cfg.seed}, lr={cfg.learning_rate}, optimizer={cfg.optimizer})"
        )


def train_simshap(
    net: ExplainerNet,
    dataset,
    game_factory: GameFactory,
    cfg: TrainConfig,
    metric: Optional[MetricMatrix] = None,
) -> dict:
    """Regression onto freshly sampled single-pass targets, one per item visit.

    Validation targets are drawn once up front and frozen, so the reported
    validation loss is a fixed function of the parameters.  Returns a history
    dict with per-epoch train/validation losses.
    """
    x_all, y_all = _resolve_dataset(dataset)
    n = x_all.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    if metric is None:
        metric = MetricMatrix("identity", net.d)
    root = RandomSource(cfg.seed)
    train_idx, val_idx = _split_dataset(n, cfg.validation_fraction, root.child(0))
    if train_idx.size == 0:
        train_idx, val_idx = val_idx, train_idx

    target_root = root.child(1)
    val_targets = np.array(
        [
            simshap_target(
                game_factory(x_all[i], int(y_all[i])),
                cfg.samples_per_input,
                target_root.child(int(i)),
                paired=cfg.paired,
            ).phi
            for i in val_idx
        ]
    ).reshape(val_idx.size, net.d)
    val_classes = y_all[val_idx].astype(np.int64) if net.n_classes > 1 else np.zeros(val_idx.size, dtype=np.int64)

    opt_state = OptimizerState(net, cfg)
    shuffle_root = root.child(2)
    draw_root = root.child(3)
    history = {"train_loss": [], "val_loss": []}
    initial_loss = None
    for epoch in range(cfg.epochs):
        order = shuffle_root.child(epoch).generator().permutation(train_idx.size)
        epoch_rng = draw_root.child(epoch)
        lr = cfg.lr_at(epoch)
        epoch_losses = []
        for start in range(0, train_idx.size, cfg.batch_size):
            batch = train_idx[order[start : start + cfg.batch_size]]
            targets = np.array(
                [
                    simshap_target(
                        game_factory(x_all[i], int(y_all[i])),
                        cfg.samples_per_input,
                        epoch_rng.child(int(i)),
                        paired=cfg.paired,
                    ).phi
                    for i in batch
                ]
            )
            classes = (
                y_all[batch].astype(np.int64)
                if net.n_classes > 1
                else np.zeros(batch.size, dtype=np.int64)
            )
            loss = backward_and_step(
                net, x_all[batch], targets, classes, metric, cfg, opt_state, lr=lr
            )
            epoch_losses.append(loss)
            if initial_loss is None:
                initial_loss = loss
            _check_divergence(loss, initial_loss, cfg, epoch)
        history["train_loss"].append(float(np.mean(epoch_losses)))
        if val_idx.size:
            val_loss, _, _ = metric_loss_and_gradients(
                net, x_all[val_idx], val_targets, val_classes, metric
            )
            history["val_loss"].append(val_loss)
    return history


def train_fastshap(
    net: ExplainerNet,
    dataset,
    game_factory: GameFactory,
    cfg: TrainConfig,
    normalize: bool = True,
) -> dict:
    """Weighted-subset regression training.

    Each item visit draws ``samples_per_input`` kernel-distributed subsets and
    regresses g^T 1^S onto v(S) - v(empty); with ``normalize`` the efficiency
    shift is part of the computation graph and the trained net is flagged to
    normalize at inference.
    """
    x_all, y_all = _resolve_dataset(dataset)
    n = x_all.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    d = net.d
    weights = kernel_normalizer(d)
    root = RandomSource(cfg.seed)
    train_idx, val_idx = _split_dataset(n, cfg.validation_fraction, root.child(0))
    if train_idx.size == 0:
        train_idx, val_idx = val_idx, train_idx
    net.normalize_inference = normalize

    games = {}

    def game_for(i: int) -> CoalitionGame:
        if i not in games:
            games[i] = game_factory(x_all[i], int(y_all[i]))
        return games[i]

    def draw_batch(indices, rng: RandomSource):
        ind = np.empty((indices.size, cfg.samples_per_input, d))
        vd = np.empty((indices.size, cfg.samples_per_input))
        va = np.empty(indices.size)
        for row, i in enumerate(indices):
            game = game_for(int(i))
            bits = sample_kernel_batch(
                weights, cfg.samples_per_input, rng.child(int(i)).generator(), paired=cfg.paired
            )
            ind[row] = bits_to_indicators(bits, d)
            vd[row] = game.values_for_bits(bits) - game.v_empty
            va[row] = game.v_all
        return ind, vd, va

    val_ind, val_vd, val_va = draw_batch(val_idx, root.child(1)) if val_idx.size else (None, None, None)
    val_classes = (
        y_all[val_idx].astype(np.int64) if net.n_classes > 1 else np.zeros(val_idx.size, dtype=np.int64)
    )

    opt_state = OptimizerState(net, cfg)
    shuffle_root = root.child(2)
    draw_root = root.child(3)
    history = {"train_loss": [], "val_loss": []}
    initial_loss = None
    for epoch in range(cfg.epochs):
        order = shuffle_root.child(epoch).generator().permutation(train_idx.size)
        epoch_rng = draw_root.child(epoch)
        lr = cfg.lr_at(epoch)
        epoch_losses = []
        for start in range(0, train_idx.size, cfg.batch_size):
            batch = train_idx[order[start : start + cfg.batch_size]]
            ind, vd, va = draw_batch(batch, epoch_rng)
            classes = (
                y_all[batch].astype(np.int64)
                if net.n_classes > 1
                else np.zeros(batch.size, dtype=np.int64)
            )
            loss, grads_w, grads_b = fastshap_loss_and_gradients(
                net, x_all[batch], ind, vd, va, classes, normalize
            )
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss (seed={cfg.seed}, lr={cfg.learning_rate})")
            opt_state.step(net, grads_w, grads_b, lr)
            epoch_losses.append(loss)
            if initial_loss is None:
                initial_loss = loss
            _check_divergence(loss, initial_loss, cfg, epoch)
        history["train_loss"].append(float(np.mean(epoch_losses)))
        if val_idx.size:
            val_loss = fastshap_loss_and_gradients(
                net, x_all[val_idx], val_ind, val_vd, val_va, val_classes, normalize
            )[0]
            history["val_loss"].append(val_loss)
    return history


def amortized_inference(
    net: ExplainerNet,
    x: np.ndarray,
    v_all: Optional[Union[float, Sequence[float]]] = None,
) -> list:
    """One forward pass -> one Attribution per class; never touches the game.

    Nets trained with in-graph normalization need the total payoff ``v_all``
    (scalar, or one value per class) supplied by the caller to reapply the
    efficiency shift; unconstrained nets return the raw output.
    """
    out = forward(net, x)
    if net.normalize_inference:
        if v_all is None:
            raise ConfigError(
                "this net normalizes predictions at inference; pass v_all (it is not "
                "recomputed here to keep inference free of game evaluations)"
            )
        v_alls = np.broadcast_to(np.asarray(v_all, dtype=np.float64), (net.n_classes,))
        out = np.stack(
            [additive_efficient_normalization(out[:, k], v_alls[k]) for k in range(net.n_classes)],
            axis=1,
        )
    return [
        Attribution(phi=out[:, k], method="amortized", samples_used=0, seed=0)
        for k in range(net.n_classes)
    ]


# --- checkpoint container (shared with the models module) -------------------

CHECKPOINT_FORMAT = "shapx-container"
CHECKPOINT_VERSION = 1


def encode_array(arr: np.ndarray) -> dict:
    """Array -> JSON-safe dict; float payloads stored as little-endian f8."""
    arr = np.asarray(arr)
    if arr.dtype.kind == "f":
        data = arr.astype("<f8")
    elif arr.dtype.kind in "iu":
        data = arr.astype("<i8")
    else:
        raise ValueError(f"unsupported array dtype {arr.dtype}")
    return {
        "shape": list(arr.shape),
        "dtype": str(data.dtype),
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def decode_array(blob: dict) -> np.ndarray:
    raw = base64.b64decode(blob["data"])
    return np.frombuffer(raw, dtype=np.dtype(blob["dtype"])).reshape(blob["shape"]).copy()


def save_container(path, kind: str, payload: dict):
    doc = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION, "kind": kind, **payload}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_container(path, expect_kind: Optional[str] = None) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} file: {path}")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported container version {doc.get('version')}")
    if expect_kind is not None and doc.get("kind") != expect_kind:
        raise ValueError(f"expected {expect_kind!r} container, found {doc.get('kind')!r}")
    return doc


def save_explainer(path, net: ExplainerNet, cfg: Optional[TrainConfig] = None):
    payload = {
        "widths": list(net.widths),
        "activation": net.activation,
        "d": net.d,
        "n_classes": net.n_classes,
        "normalize_inference": net.normalize_inference,
        "weights": [encode_array(w) for w in net.weights],
        "biases": [encode_array(b) for b in net.biases],
        "train_config": asdict(cfg) if cfg is not None else None,
    }
    save_container(path, "explainer", payload)


def load_explainer(path) -> ExplainerNet:
    doc = load_container(path, expect_kind="explainer")
    return ExplainerNet(
        widths=tuple(doc["widths"]),
        weights=[decode_array(w) for w in doc["weights"]],
        biases=[decode_array(b) for b in doc["biases"]],
        activation=doc["activation"],
        d=doc["d"],
        n_classes=doc["n_classes"],
        normalize_inference=doc["normalize_inference"],
    )
