"""Small fully connected binary classifier trained with cross-entropy.

The network maps R^2 through tanh hidden layers to one linear output
score; sigmoid(score) is the class-1 probability.  Scores, not
probabilities, are the working representation: the loss is evaluated
directly on scores via softplus identities (no log of a rounded
probability), and a probability threshold is converted once into score
space before classifying — which makes "move the decision threshold"
and "shift the final bias" visibly the same operation.

Everything is plain numpy with hand-written backpropagation, verified
in the test suite against central finite differences.
"""

import math
from dataclasses import dataclass

import numpy as np

from .seeding import make_rng

# name -> (activation, derivative expressed in terms of the activation output)
_ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
}

_PROB_LO = np.nextafter(0.0, 1.0)
_PROB_HI = np.nextafter(1.0, 0.0)

_MODEL_MAGIC = "labelnoise-mlp 1"


class TrainingDivergedError(RuntimeError):
    """Training loss stopped being finite."""


class ModelFormatError(ValueError):
    """A saved-model file failed to parse; the message carries the line number."""


@dataclass(frozen=True)
class Architecture:
    """Layer plan: input width, hidden widths, named hidden activation; output is 1 score."""

    input_dim: int = 2
    hidden_sizes: tuple[int, ...] = (15, 15)
    hidden_activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "input_dim", int(self.input_dim))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden sizes must be >= 1, got {self.hidden_sizes}")
        if self.hidden_activation not in _ACTIVATIONS:
            known = ", ".join(sorted(_ACTIVATIONS))
            raise ValueError(f"unknown activation {self.hidden_activation!r} (known: {known})")

    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, 1)


@dataclass(frozen=True)
class MlpParams:
    """Weights[i] has shape (sizes[i], sizes[i+1]); biases[i] has shape (sizes[i+1],)."""

    arch: Architecture
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = self.arch.layer_sizes()
        w = tuple(np.asarray(a, dtype=np.float64) for a in self.weights)
        b = tuple(np.asarray(a, dtype=np.float64) for a in self.biases)
        if len(w) != len(sizes) - 1 or len(b) != len(sizes) - 1:
            raise ValueError(f"expected {len(sizes) - 1} layers, got {len(w)} weights / {len(b)} biases")
        for i, (wi, bi) in enumerate(zip(w, b)):
            want = (sizes[i], sizes[i + 1])
            if wi.shape != want:
                raise ValueError(f"layer {i}: weight shape {wi.shape} != {want}")
            if bi.shape != (sizes[i + 1],):
                raise ValueError(f"layer {i}: bias shape {bi.shape} != ({sizes[i + 1]},)")
            if not (np.isfinite(wi).all() and np.isfinite(bi).all()):
                raise ValueError(f"layer {i}: parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def n_layers(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class Gradients:
    """Loss gradients, shaped exactly like the MlpParams they belong to."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 0.0
    init_seed: int = 0
    early_stop_tol: float | None = None  # stop when an epoch improves the loss by less
    average_tail: int = 0  # >0: return the average of the last k epoch snapshots
    # tail averaging damps the stationary noise of constant-step SGD; it is
    # what makes training through near-total label noise reproducible, where
    # the useful signal is a ~1e-2 wobble of the predicted probability

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0.0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.early_stop_tol is not None and not self.early_stop_tol >= 0.0:
            raise ValueError(f"early_stop_tol must be >= 0, got {self.early_stop_tol}")
        if not 0 <= self.average_tail <= self.epochs:
            raise ValueError(f"average_tail must lie in [0, epochs], got {self.average_tail}")


@dataclass(frozen=True)
class TrainResult:
    params: MlpParams
    epoch_losses: tuple[float, ...]


def sigmoid(s):
    """Numerically stable logistic, clipped into the open interval (0, 1).

    Scores of either sign use the exp(-|s|) branch, so huge |s| neither
    overflows nor collapses the probability onto a hard 0/1.
    """
    s = np.asarray(s, dtype=np.float64)
    t = np.exp(-np.abs(s))
    p = np.where(s >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))
    p = np.clip(p, _PROB_LO, _PROB_HI)
    return float(p) if p.ndim == 0 else p


def init_params(arch: Architecture, seed: int) -> MlpParams:
    """Uniform [-a, a] weights with a = sqrt(6 / (fan_in + fan_out)); zero biases."""
    rng = make_rng(seed, "mlp-init")
    sizes = arch.layer_sizes()
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        a = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-a, a, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(arch, tuple(weights), tuple(biases))


def _as_batch(params: MlpParams, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.arch.input_dim:
        raise ValueError(f"inputs must have shape (m, {params.arch.input_dim}) or ({params.arch.input_dim},), got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("inputs must be finite")
    return x, single


def _forward_stack(act_name: str, weights, biases, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    act, _ = _ACTIVATIONS[act_name]
    a = x
    stack = [a]
    for w, b in zip(weights[:-1], biases[:-1]):
        a = act(a @ w + b)
        stack.append(a)
    s = (a @ weights[-1] + biases[-1])[:, 0]
    return stack, s


def score(params: MlpParams, x):
    """Raw pre-sigmoid output; one point (input_dim,) -> float, batch (m, input_dim) -> (m,)."""
    x, single = _as_batch(params, x)
    _, s = _forward_stack(params.arch.hidden_activation, params.weights, params.biases, x)
    return float(s[0]) if single else s


def forward(params: MlpParams, x) -> tuple[float, float]:
    """(score, probability) for a single input point."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.arch.input_dim,):
        raise ValueError(f"forward takes one point of shape ({params.arch.input_dim},), got {x.shape}")
    s = score(params, x)
    return s, sigmoid(s)


def _softplus(s: np.ndarray) -> np.ndarray:
    return np.maximum(s, 0.0) + np.log1p(np.exp(-np.abs(s)))


def _as_targets(t, m: int) -> np.ndarray:
    t = np.asarray(t)
    if t.shape != (m,):
        raise ValueError(f"targets must have shape ({m},), got {t.shape}")
    if not np.isin(t, (0, 1)).all():
        raise ValueError("targets must be 0 or 1")
    return t.astype(np.float64)


def loss(params: MlpParams, x, targets) -> float:
    """Mean binary cross-entropy, evaluated on raw scores.

    softplus(s) - t*s equals -(t*log(p) + (1-t)*log(1-p)) for p = sigmoid(s)
    but never takes the log of a rounded probability, so saturated scores
    give exact losses (including exactly 0 at a perfect fit).
    """
    x, _ = _as_batch(params, x)
    if x.shape[0] == 0:
        raise ValueError("loss needs at least one sample")
    t = _as_targets(targets, x.shape[0])
    _, s = _forward_stack(params.arch.hidden_activation, params.weights, params.biases, x)
    return float(np.mean(_softplus(s) - t * s))


def _loss_and_grads(act_name: str, weights, biases, x: np.ndarray, t: np.ndarray) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    _, dact = _ACTIVATIONS[act_name]
    stack, s = _forward_stack(act_name, weights, biases, x)
    m = x.shape[0]
    batch_loss = float(np.mean(_softplus(s) - t * s))

    n_layers = len(weights)
    gw: list = [None] * n_layers
    gb: list = [None] * n_layers
    # d(mean loss)/d(score) = (sigmoid(s) - t) / m
    delta = ((sigmoid(s) - t) / m)[:, None]
    gw[-1] = stack[-1].T @ delta
    gb[-1] = delta.sum(axis=0)
    back = delta @ weights[-1].T
    for layer in range(n_layers - 2, -1, -1):
        dh = back * dact(stack[layer + 1])
        gw[layer] = stack[layer].T @ dh
        gb[layer] = dh.sum(axis=0)
        if layer:
            back = dh @ weights[layer].T
    return batch_loss, gw, gb


def grad(params: MlpParams, x, targets) -> Gradients:
    """Exact gradient of ``loss`` w.r.t. every weight and bias (backprop)."""
    x, _ = _as_batch(params, x)
    if x.shape[0] == 0:
        raise ValueError("grad needs at least one sample")
    t = _as_targets(targets, x.shape[0])
    _, gw, gb = _loss_and_grads(params.arch.hidden_activation, params.weights, params.biases, x, t)
    return Gradients(tuple(gw), tuple(gb))


def train(x, targets, arch: Architecture = Architecture(), cfg: TrainConfig = TrainConfig()) -> TrainResult:
    """Mini-batch SGD with momentum on 0/1 targets (normally the observed labels).

    Fully deterministic: initial parameters and every epoch's shuffle are
    derived from cfg.init_seed, so identical (x, targets, arch, cfg) give
    bit-identical results.  The returned epoch_losses are running means of
    the per-batch losses. Raises TrainingDivergedError when an epoch loss
    stops being finite.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != arch.input_dim:
        raise ValueError(f"training features must have shape (n, {arch.input_dim}), got {x.shape}")
    n = x.shape[0]
    if n < 1:
        raise ValueError("training needs at least one sample")
    if not np.isfinite(x).all():
        raise ValueError("training features must be finite")
    t = _as_targets(targets, n)

    params = init_params(arch, cfg.init_seed)
    weights = [w.copy() for w in params.weights]
    biases = [b.copy() for b in params.biases]
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    shuffle_rng = make_rng(cfg.init_seed, "mlp-shuffle")

    act_name = arch.hidden_activation
    epoch_losses: list[float] = []
    avg_w = avg_b = None
    averaged = 0
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        running = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            batch_loss, gw, gb = _loss_and_grads(act_name, weights, biases, x[idx], t[idx])
            running += batch_loss * idx.size
            for i in range(len(weights)):
                step_w = gw[i] if cfg.weight_decay == 0.0 else gw[i] + cfg.weight_decay * weights[i]
                vel_w[i] = cfg.momentum * vel_w[i] - cfg.learning_rate * step_w
                vel_b[i] = cfg.momentum * vel_b[i] - cfg.learning_rate * gb[i]
                weights[i] += vel_w[i]
                biases[i] += vel_b[i]
        epoch_loss = running / n
        if not math.isfinite(epoch_loss):
            raise TrainingDivergedError(f"epoch {epoch + 1}: training loss is {epoch_loss}")
        epoch_losses.append(epoch_loss)
        if cfg.average_tail and epoch >= cfg.epochs - cfg.average_tail:
            if avg_w is None:
                avg_w = [w.copy() for w in weights]
                avg_b = [b.copy() for b in biases]
            else:
                for i in range(len(weights)):
                    avg_w[i] += weights[i]
                    avg_b[i] += biases[i]
            averaged += 1
        if (
            cfg.early_stop_tol is not None
            and epoch > 0
            and epoch_losses[-2] - epoch_losses[-1] < cfg.early_stop_tol
        ):
            break
    if averaged:
        weights = [w / averaged for w in avg_w]
        biases = [b / averaged for b in avg_b]
    return TrainResult(MlpParams(arch, tuple(w.copy() for w in weights), tuple(b.copy() for b in biases)), tuple(epoch_losses))


def shift_bias(params: MlpParams, delta: float) -> MlpParams:
    """Copy of params with the final bias lowered by delta; nothing else changes.

    Every score drops by exactly delta, so deciding at score >= 0 with the
    shifted network is deciding at score >= delta with the original: bias
    shifting and threshold moving are the same correction.
    """
    new_last = params.biases[-1] - float(delta)
    return MlpParams(params.arch, params.weights, params.biases[:-1] + (new_last,))


def classify(params: MlpParams, x, threshold: float = 0.5):
    """Class decision at a probability threshold; ties go to class 1.

    The threshold is converted once to score space (its logit), and the
    decision is the single comparison score >= logit(threshold) — for the
    default 0.5 that is exactly score >= 0.
    """
    threshold = float(threshold)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie strictly inside (0, 1), got {threshold}")
    cut = math.log(threshold / (1.0 - threshold))
    s = score(params, x)
    if isinstance(s, float):
        return int(s >= cut)
    return (s >= cut).astype(np.int64)


def save_model(params: MlpParams, path) -> None:
    """Text dump of architecture + parameters; floats use repr (exact round trip)."""
    lines = [_MODEL_MAGIC, f"activation {params.arch.hidden_activation}",
             "sizes " + " ".join(str(s) for s in params.arch.layer_sizes())]
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        lines.append(f"W{i} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(repr(float(v)) for v in row))
        lines.append(f"b{i} {b.shape[0]}")
        lines.append(" ".join(repr(float(v)) for v in b))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> MlpParams:
    """Inverse of save_model; bad files raise ModelFormatError with a line number."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()

    def fail(lineno: int, why: str):
        raise ModelFormatError(f"line {lineno}: {why}")

    def floats(lineno: int, text: str, want: int) -> np.ndarray:
        parts = text.split()
        if len(parts) != want:
            fail(lineno, f"expected {want} values, got {len(parts)}")
        try:
            return np.array([float(p) for p in parts])
        except ValueError as exc:
            fail(lineno, str(exc))

    if not lines or lines[0] != _MODEL_MAGIC:
        fail(1, f"expected header {_MODEL_MAGIC!r}")
    if len(lines) < 3 or not lines[1].startswith("activation "):
        fail(2, "expected 'activation <name>'")
    activation = lines[1].split(" ", 1)[1]
    if not lines[2].startswith("sizes "):
        fail(3, "expected 'sizes <n> <n> ...'")
    try:
        sizes = tuple(int(s) for s in lines[2].split()[1:])
    except ValueError as exc:
        fail(3, str(exc))
    if len(sizes) < 2 or sizes[-1] != 1:
        fail(3, f"layer sizes must end with 1, got {sizes}")
    arch = Architecture(sizes[0], sizes[1:-1], activation)

    weights = []
    biases = []
    at = 3
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        if at >= len(lines) or lines[at].split() != [f"W{i}", str(fan_in), str(fan_out)]:
            fail(at + 1, f"expected 'W{i} {fan_in} {fan_out}'")
        at += 1
        rows = []
        for _ in range(fan_in):
            if at >= len(lines):
                fail(at + 1, "unexpected end of file inside a weight block")
            rows.append(floats(at + 1, lines[at], fan_out))
            at += 1
        weights.append(np.vstack(rows))
        if at >= len(lines) or lines[at].split() != [f"b{i}", str(fan_out)]:
            fail(at + 1, f"expected 'b{i} {fan_out}'")
        at += 1
        if at >= len(lines):
            fail(at + 1, "unexpected end of file inside a bias block")
        biases.append(floats(at + 1, lines[at], fan_out))
        at += 1
    if any(line.strip() for line in lines[at:]):
        fail(at + 1, "trailing content after the last parameter block")
    try:
        return MlpParams(arch, tuple(weights), tuple(biases))
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None
