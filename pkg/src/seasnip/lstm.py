"""Stacked LSTM with a linear output head, implemented from scratch.

The cell follows the standard four-gate form

    f1 = sigmoid(W1 x + U1 h + b1)      (forget gate)
    f2 = sigmoid(W2 x + U2 h + b2)      (input gate)
    f3 = tanh   (W3 x + U3 h + b3)      (candidate)
    f4 = sigmoid(W4 x + U4 h + b4)      (output gate)
    c_t = f1 * c_{t-1} + f2 * f3
    h_t = f4 * tanh(c_t)

Input windows are resampled into [N/tau, tau] blocks per channel (trailing
remainder truncated), each recurrent step consumes tau consecutive samples
of every channel and the linear head emits tau output samples per step.
Training is mini-batch Adam on mean-squared error with exact
backpropagation through time and a train-loss plateau stopping rule.

All math is float64 numpy; recurrent steps loop in Python but the gate
products are batched matrix multiplies, which keeps desk-scale training in
BLAS rather than in the interpreter.
"""

import copy
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import TrainingDivergence

MODEL_FORMAT_VERSION = 1

# row blocks of the stacked gate matrices, in order
_GATES = ("forget", "input", "candidate", "output")


def sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class NetworkConfig:
    num_layers: int = 2
    hidden_size: int = 30
    tau: int = 9
    input_channels: int = 3
    output_channels: int = 1
    learning_rate: float = 0.01
    max_epochs: int = 1000
    patience_epochs: int = 100
    min_improvement_fraction: float = 0.01
    batch_size: int = 32
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("num_layers", "hidden_size", "tau", "input_channels",
                     "output_channels", "max_epochs", "patience_epochs",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


@dataclass
class LstmCellParams:
    """Stacked gate parameters: W is (4h, d), U is (4h, h), b is (4h,)."""

    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        four_h, d = self.W.shape
        if four_h % 4 != 0:
            raise ValueError("W must stack the four gates row-wise")
        h = four_h // 4
        if self.U.shape != (four_h, h) or self.b.shape != (four_h,):
            raise ValueError("gate parameter shapes are inconsistent")

    @property
    def hidden_size(self) -> int:
        return self.W.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.W.shape[1]


@dataclass
class LstmState:
    hidden: np.ndarray
    cell: np.ndarray


@dataclass
class ChannelNormalization:
    """Per-channel z-score constants fit on the training split only."""

    input_mean: np.ndarray
    input_scale: np.ndarray
    target_mean: float
    target_scale: float


class LstmNetwork:
    """Stacked cells plus linear head; immutable once trained."""

    def __init__(self, config: NetworkConfig, layers, head_weight, head_bias,
                 normalization: ChannelNormalization):
        d0 = config.input_channels * config.tau
        expected = d0
        for i, layer in enumerate(layers):
            if layer.hidden_size != config.hidden_size:
                raise ValueError(f"layer {i} hidden size mismatch")
            if layer.input_size != expected:
                raise ValueError(f"layer {i} input width {layer.input_size}, "
                                 f"expected {expected}")
            expected = config.hidden_size
        ko = config.output_channels * config.tau
        if head_weight.shape != (ko, config.hidden_size):
            raise ValueError("head weight shape mismatch")
        if head_bias.shape != (ko,):
            raise ValueError("head bias shape mismatch")
        self.config = config
        self.layers = list(layers)
        self.head_weight = head_weight
        self.head_bias = head_bias
        self.normalization = normalization

    # --- parameter plumbing -------------------------------------------------

    def parameter_items(self):
        """(name, array) pairs for every learnable tensor, in fixed order."""
        out = []
        for i, layer in enumerate(self.layers):
            out += [(f"layer{i}.W", layer.W), (f"layer{i}.U", layer.U),
                    (f"layer{i}.b", layer.b)]
        out += [("head.W", self.head_weight), ("head.b", self.head_bias)]
        return out

    def copy_parameters(self):
        return {name: arr.copy() for name, arr in self.parameter_items()}

    def load_parameters(self, params: dict):
        for name, arr in self.parameter_items():
            arr[...] = params[name]


def initialize_network(config: NetworkConfig,
                       normalization: ChannelNormalization | None = None
                       ) -> LstmNetwork:
    """Uniform init in [-1/sqrt(h), 1/sqrt(h)], forget-gate bias shifted +1."""
    rng = np.random.default_rng(config.rng_seed)
    h = config.hidden_size
    bound = 1.0 / np.sqrt(h)
    layers = []
    d = config.input_channels * config.tau
    for _ in range(config.num_layers):
        W = rng.uniform(-bound, bound, (4 * h, d))
        U = rng.uniform(-bound, bound, (4 * h, h))
        b = rng.uniform(-bound, bound, 4 * h)
        b[:h] += 1.0  # keep the forget gate open early in training
        layers.append(LstmCellParams(W, U, b))
        d = h
    ko = config.output_channels * config.tau
    head_w = rng.uniform(-bound, bound, (ko, h))
    head_b = rng.uniform(-bound, bound, ko)
    if normalization is None:
        normalization = ChannelNormalization(
            input_mean=np.zeros(config.input_channels),
            input_scale=np.ones(config.input_channels),
            target_mean=0.0,
            target_scale=1.0,
        )
    return LstmNetwork(config, layers, head_w, head_b, normalization)


# ---------------------------------------------------------------------------
# elementary operations


def cell_forward(x: np.ndarray, state: LstmState,
                 params: LstmCellParams) -> LstmState:
    """One cell update for a single input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.input_size,):
        raise ValueError(f"input shape {x.shape}, expected ({params.input_size},)")
    h = params.hidden_size
    if state.hidden.shape != (h,) or state.cell.shape != (h,):
        raise ValueError("state shape mismatch")
    a = params.W @ x + params.U @ state.hidden + params.b
    f1 = sigmoid(a[0:h])
    f2 = sigmoid(a[h:2 * h])
    f3 = np.tanh(a[2 * h:3 * h])
    f4 = sigmoid(a[3 * h:4 * h])
    c = f1 * state.cell + f2 * f3
    return LstmState(hidden=f4 * np.tanh(c), cell=c)


def resample(values: np.ndarray, tau: int) -> np.ndarray:
    """Reshape a (N,) or (N, C) window into a [N//tau, tau*C] matrix.

    Row j holds samples j*tau .. j*tau+tau-1 of each channel, channels
    concatenated block-wise; a trailing remainder shorter than tau is
    dropped.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    n, n_ch = arr.shape
    steps = n // tau
    if steps == 0:
        raise ValueError(f"series of length {n} shorter than tau={tau}")
    arr = arr[: steps * tau]
    blocks = [arr[:, c].reshape(steps, tau) for c in range(n_ch)]
    return np.concatenate(blocks, axis=1)


def mse(target: np.ndarray, prediction: np.ndarray) -> float:
    target = np.asarray(target, dtype=np.float64)
    prediction = np.asarray(prediction, dtype=np.float64)
    if target.shape != prediction.shape:
        raise ValueError("length mismatch between target and prediction")
    diff = target - prediction
    return float(np.mean(diff * diff))


# ---------------------------------------------------------------------------
# batched forward/backward over resampled step sequences


def _prepare_inputs(net: LstmNetwork, windows: np.ndarray) -> np.ndarray:
    """Normalize raw (B, W, C) input windows and resample to (B, T, tau*C)."""
    norm = net.normalization
    z = (windows - norm.input_mean) / norm.input_scale
    return np.stack([resample(z[b], net.config.tau) for b in range(z.shape[0])])


def _prepare_targets(net: LstmNetwork, targets: np.ndarray) -> np.ndarray:
    norm = net.normalization
    z = (targets - norm.target_mean) / norm.target_scale
    return np.stack([resample(z[b], net.config.tau) for b in range(z.shape[0])])


def _forward_core(net: LstmNetwork, X: np.ndarray, want_cache: bool):
    """Run the stacked cells over (B, T, d) steps; returns normalized
    per-step head outputs (B, T, tau*out) and caches for backward."""
    B, T, _ = X.shape
    h = net.config.hidden_size
    caches = []
    layer_input = X
    for layer in net.layers:
        Xp = layer_input.reshape(B * T, -1) @ layer.W.T
        Xp = Xp.reshape(B, T, 4 * h) + layer.b
        H = np.empty((B, T, h))
        C = np.empty((B, T, h))
        F = np.empty((B, T, 4 * h)) if want_cache else None
        h_prev = np.zeros((B, h))
        c_prev = np.zeros((B, h))
        for t in range(T):
            a = Xp[:, t] + h_prev @ layer.U.T
            f1 = sigmoid(a[:, 0:h])
            f2 = sigmoid(a[:, h:2 * h])
            f3 = np.tanh(a[:, 2 * h:3 * h])
            f4 = sigmoid(a[:, 3 * h:4 * h])
            c = f1 * c_prev + f2 * f3
            hc = f4 * np.tanh(c)
            if want_cache:
                F[:, t, 0:h] = f1
                F[:, t, h:2 * h] = f2
                F[:, t, 2 * h:3 * h] = f3
                F[:, t, 3 * h:4 * h] = f4
            C[:, t] = c
            H[:, t] = hc
            h_prev = hc
            c_prev = c
        if want_cache:
            caches.append({"X": layer_input, "F": F, "C": C, "H": H})
        layer_input = H
    Y = layer_input.reshape(B * T, h) @ net.head_weight.T
    Y = Y.reshape(B, T, -1) + net.head_bias
    return Y, caches


def forward(net: LstmNetwork, window: np.ndarray) -> np.ndarray:
    """Predict the output window for one (W, C) input window.

    Output length is floor(W / tau) * tau samples in physical units.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[1] != net.config.input_channels:
        raise ValueError(
            f"expected (window, {net.config.input_channels}) input, "
            f"got {window.shape}"
        )
    return forward_batch(net, window[None, :, :])[0]


def forward_batch(net: LstmNetwork, windows: np.ndarray) -> np.ndarray:
    """Vectorized ``forward`` over (B, W, C) windows -> (B, out_len)."""
    X = _prepare_inputs(net, np.asarray(windows, dtype=np.float64))
    Y, _ = _forward_core(net, X, want_cache=False)
    norm = net.normalization
    B = Y.shape[0]
    return Y.reshape(B, -1) * norm.target_scale + norm.target_mean


def batch_loss(net: LstmNetwork, windows: np.ndarray,
               targets: np.ndarray) -> float:
    """Batch-mean MSE in physical target units (truncated to the resample
    length)."""
    preds = forward_batch(net, windows)
    tr = np.asarray(targets, dtype=np.float64)[:, : preds.shape[1]]
    return mse(tr, preds)


def batch_gradients(net: LstmNetwork, windows: np.ndarray,
                    targets: np.ndarray):
    """Loss and exact gradients of ``batch_loss`` for every parameter.

    Returns (loss, grads) with grads keyed like ``parameter_items``. An
    empty batch yields zero gradients.
    """
    grads = {name: np.zeros_like(arr) for name, arr in net.parameter_items()}
    windows = np.asarray(windows, dtype=np.float64)
    if windows.shape[0] == 0:
        return 0.0, grads

    X = _prepare_inputs(net, windows)
    Yn, caches = _forward_core(net, X, want_cache=True)
    Tn = _prepare_targets(net, np.asarray(targets, dtype=np.float64))
    B, T, ko = Yn.shape
    h = net.config.hidden_size

    norm = net.normalization
    diff = Yn - Tn
    # physical-units MSE: scale^2 times the normalized-space MSE
    scale2 = norm.target_scale**2
    loss = float(np.mean(diff * diff) * scale2)
    dY = diff * (2.0 * scale2 / diff.size)

    grads["head.W"] = dY.reshape(B * T, ko).T @ caches[-1]["H"].reshape(B * T, h)
    grads["head.b"] = dY.sum(axis=(0, 1))
    dH_ext = (dY.reshape(B * T, ko) @ net.head_weight).reshape(B, T, h)

    for li in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[li]
        cache = caches[li]
        F, C, H, Xl = cache["F"], cache["C"], cache["H"], cache["X"]
        dA = np.empty((B, T, 4 * h))
        dh_next = np.zeros((B, h))
        dc_next = np.zeros((B, h))
        for t in range(T - 1, -1, -1):
            f1 = F[:, t, 0:h]
            f2 = F[:, t, h:2 * h]
            f3 = F[:, t, 2 * h:3 * h]
            f4 = F[:, t, 3 * h:4 * h]
            tc = np.tanh(C[:, t])
            dh = dH_ext[:, t] + dh_next
            dc = dc_next + dh * f4 * (1.0 - tc * tc)
            c_prev = C[:, t - 1] if t > 0 else np.zeros((B, h))
            dA[:, t, 0:h] = dc * c_prev * f1 * (1.0 - f1)
            dA[:, t, h:2 * h] = dc * f3 * f2 * (1.0 - f2)
            dA[:, t, 2 * h:3 * h] = dc * f2 * (1.0 - f3 * f3)
            dA[:, t, 3 * h:4 * h] = dh * tc * f4 * (1.0 - f4)
            dh_next = dA[:, t] @ layer.U
            dc_next = dc * f1
        dA2 = dA.reshape(B * T, 4 * h)
        d_l = Xl.shape[2]
        grads[f"layer{li}.W"] = dA2.T @ Xl.reshape(B * T, d_l)
        H_prev = np.concatenate([np.zeros((B, 1, h)), H[:, :-1]], axis=1)
        grads[f"layer{li}.U"] = dA2.T @ H_prev.reshape(B * T, h)
        grads[f"layer{li}.b"] = dA2.sum(axis=0)
        dH_ext = (dA2 @ layer.W).reshape(B, T, d_l)

    return loss, grads


# ---------------------------------------------------------------------------
# training


class AdamOptimizer:
    """Adam with the usual defaults (b1=0.9, b2=0.999, eps=1e-8)."""

    def __init__(self, params: dict, learning_rate: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def update(self, params: dict, grads: dict) -> None:
        self.step += 1
        bc1 = 1.0 - self.beta1**self.step
        bc2 = 1.0 - self.beta2**self.step
        for key, p in params.items():
            g = grads[key]
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * g * g
            p -= self.lr * (self.m[key] / bc1) / (
                np.sqrt(self.v[key] / bc2) + self.eps
            )


def plateau_reached(losses, patience: int, min_fraction: float) -> bool:
    """Training-loss stopping rule.

    True when the best loss so far is not at least ``min_fraction`` better
    than the best loss known ``patience`` epochs ago. On a flat trace this
    fires exactly at epoch ``patience + 1`` of the plateau.
    """
    e = len(losses) - 1
    if e < patience:
        return False
    best_now = min(losses)
    best_old = min(losses[: e - patience + 1])
    return best_now > (1.0 - min_fraction) * best_old


@dataclass
class TrainingHistory:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)
    stop_reason: str = ""
    best_epoch: int = -1


def fit_normalization(X: np.ndarray, Y: np.ndarray) -> ChannelNormalization:
    """Z-score constants from the training split; scales floored at 1e-12."""
    mean = X.mean(axis=(0, 1))
    scale = np.maximum(X.std(axis=(0, 1)), 1e-12)
    return ChannelNormalization(
        input_mean=mean,
        input_scale=scale,
        target_mean=float(Y.mean()),
        target_scale=float(max(Y.std(), 1e-12)),
    )


def train(X_train: np.ndarray, Y_train: np.ndarray,
          X_val: np.ndarray, Y_val: np.ndarray,
          config: NetworkConfig) -> tuple[LstmNetwork, TrainingHistory]:
    """Mini-batch Adam training with best-validation checkpointing.

    Stops at ``max_epochs`` or when the training MSE fails to improve by at
    least ``min_improvement_fraction`` over ``patience_epochs`` epochs; the
    returned network carries the parameters with the lowest validation MSE.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    Y_train = np.asarray(Y_train, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    Y_val = np.asarray(Y_val, dtype=np.float64)
    if X_train.shape[0] == 0 or X_val.shape[0] == 0:
        raise ValueError("training and validation splits must be nonempty")

    norm = fit_normalization(X_train, Y_train)
    net = initialize_network(config, norm)
    params = dict(net.parameter_items())
    optimizer = AdamOptimizer(params, config.learning_rate)
    rng = np.random.default_rng(config.rng_seed + 1)

    history = TrainingHistory()
    best_val = np.inf
    best_params = net.copy_parameters()
    n = X_train.shape[0]

    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = batch_gradients(net, X_train[idx], Y_train[idx])
            if not np.isfinite(loss):
                raise TrainingDivergence(epoch)
            optimizer.update(params, grads)
            total += loss * idx.size
        train_mse = total / n

        val_mse = _evaluate_mse(net, X_val, Y_val, config.batch_size)
        if not np.isfinite(val_mse):
            raise TrainingDivergence(epoch)
        history.train_mse.append(train_mse)
        history.val_mse.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best_params = net.copy_parameters()
            history.best_epoch = epoch

        if plateau_reached(history.train_mse, config.patience_epochs,
                           config.min_improvement_fraction):
            history.stop_reason = "plateau"
            break
    else:
        history.stop_reason = "max_epochs"

    net.load_parameters(best_params)
    return net, history


def _evaluate_mse(net, X, Y, batch_size) -> float:
    total = 0.0
    n = X.shape[0]
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        total += batch_loss(net, X[start:stop], Y[start:stop]) * (stop - start)
    return total / n


# ---------------------------------------------------------------------------
# serialization: a single self-describing JSON document


def save_model(path, net: LstmNetwork) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": asdict(net.config),
        "normalization": {
            "input_mean": net.normalization.input_mean.tolist(),
            "input_scale": net.normalization.input_scale.tolist(),
            "target_mean": net.normalization.target_mean,
            "target_scale": net.normalization.target_scale,
        },
        "parameters": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in net.parameter_items()
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> LstmNetwork:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format: {doc.get('format_version')}")
    config = NetworkConfig(**doc["config"])
    norm = ChannelNormalization(
        input_mean=np.asarray(doc["normalization"]["input_mean"]),
        input_scale=np.asarray(doc["normalization"]["input_scale"]),
        target_mean=doc["normalization"]["target_mean"],
        target_scale=doc["normalization"]["target_scale"],
    )
    net = initialize_network(config, norm)
    params = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in doc["parameters"].items()
    }
    net.load_parameters(params)
    return net
