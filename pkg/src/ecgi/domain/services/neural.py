"""LSTM and dense layers with hand-written backward passes, Adam, and a
finite-difference gradient checker.

Layers work on batches of column sequences shaped (batch, features, T); a
2-D (features, T) array is treated as a batch of one and results come back
2-D. The stacked LSTM weight matrix W is 4h × (d_in + h) with gate blocks in
the order input, forget, cell, output.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.special import expit

from ..exceptions import (
    GradientCheckException,
    InvalidArgumentException,
    InvalidStateException,
)
from ..value_objects import Activation

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-6
VARIANCE_CEILING = 1e6


@dataclass
class LSTMLayer:
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        rows, cols = self.W.shape
        if rows % 4 or self.b.shape != (rows,) or cols <= rows // 4:
            raise InvalidArgumentException(
                f"LSTM weights must be 4h×(d_in+h) with bias 4h, got W{self.W.shape} b{self.b.shape}"
            )

    @property
    def hidden_dim(self) -> int:
        return self.W.shape[0] // 4

    @property
    def input_dim(self) -> int:
        return self.W.shape[1] - self.hidden_dim


@dataclass
class DenseHead:
    W: np.ndarray
    b: np.ndarray
    activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise InvalidArgumentException(
                f"dense weights must be out×in with bias out, got W{self.W.shape} b{self.b.shape}"
            )

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    @property
    def output_dim(self) -> int:
        return self.W.shape[0]


def _fingerprint(W: np.ndarray, b: np.ndarray) -> Tuple:
    return (W.shape, b.shape, float(W.sum()), float(b.sum()), float(np.abs(W).sum()))


@dataclass
class LSTMCache:
    inputs: np.ndarray        # (T, B, d_in + h) concatenated [x_t, h_{t-1}]
    gates: np.ndarray         # (T, 4, B, h) activated i, f, g, o
    cells: np.ndarray         # (T, B, h)
    cell_tanh: np.ndarray     # (T, B, h)
    fingerprint: Tuple
    squeezed: bool


@dataclass
class DenseCache:
    inputs: np.ndarray        # (B, d_in, T)
    outputs: np.ndarray       # (B, d_out, T)
    active: Optional[np.ndarray]
    fingerprint: Tuple
    squeezed: bool


def _as_batch(x: np.ndarray) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        return x[None, :, :], True
    if x.ndim == 3:
        return x, False
    raise InvalidArgumentException(f"expected (features, T) or (batch, features, T), got {x.shape}")


def _restore(x: np.ndarray, squeezed: bool) -> np.ndarray:
    return x[0] if squeezed else x


def init_lstm(input_dim: int, hidden_dim: int, rng: np.random.Generator) -> LSTMLayer:
    bound = 1.0 / np.sqrt(hidden_dim)
    W = rng.uniform(-bound, bound, size=(4 * hidden_dim, input_dim + hidden_dim))
    b = np.zeros(4 * hidden_dim)
    b[hidden_dim:2 * hidden_dim] = 1.0
    return LSTMLayer(W, b)


def init_dense(
    input_dim: int,
    output_dim: int,
    rng: np.random.Generator,
    activation: Activation = Activation.IDENTITY,
) -> DenseHead:
    bound = 1.0 / np.sqrt(input_dim)
    W = rng.uniform(-bound, bound, size=(output_dim, input_dim))
    return DenseHead(W, np.zeros(output_dim), activation)


def lstm_forward(layer: LSTMLayer, x: np.ndarray) -> Tuple[np.ndarray, LSTMCache]:
    """Run the layer over every column; returns hidden states (B, h, T) and the cache."""
    x3, squeezed = _as_batch(x)
    B, d, T = x3.shape
    if d != layer.input_dim:
        raise InvalidArgumentException(f"LSTM expects {layer.input_dim} input features, got {d}")
    H = layer.hidden_dim

    inputs = np.empty((T, B, d + H))
    gates = np.empty((T, 4, B, H))
    cells = np.empty((T, B, H))
    cell_tanh = np.empty((T, B, H))
    hidden = np.empty((B, H, T))

    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        inputs[t, :, :d] = x3[:, :, t]
        inputs[t, :, d:] = h
        z = inputs[t] @ layer.W.T + layer.b
        i = expit(z[:, :H])
        f = expit(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = expit(z[:, 3 * H:])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[t, 0], gates[t, 1], gates[t, 2], gates[t, 3] = i, f, g, o
        cells[t] = c
        cell_tanh[t] = tc
        hidden[:, :, t] = h

    cache = LSTMCache(inputs, gates, cells, cell_tanh, _fingerprint(layer.W, layer.b), squeezed)
    return _restore(hidden, squeezed), cache


def _check_cache(layer_W: np.ndarray, layer_b: np.ndarray, fingerprint: Tuple):
    if _fingerprint(layer_W, layer_b) != fingerprint:
        raise InvalidStateException("cache was produced by different layer parameters")


def lstm_backward(
    layer: LSTMLayer, cache: LSTMCache, upstream: np.ndarray
) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """Backpropagation through time; returns d/dx (input shape) and {"W", "b"} gradients."""
    _check_cache(layer.W, layer.b, cache.fingerprint)
    dh_all, _ = _as_batch(upstream)
    T, B, width = cache.inputs.shape
    H = layer.hidden_dim
    d = width - H
    if dh_all.shape != (B, H, T):
        raise InvalidArgumentException(
            f"upstream gradient shape {dh_all.shape} does not match hidden states {(B, H, T)}"
        )

    dW = np.zeros_like(layer.W)
    db = np.zeros_like(layer.b)
    dx = np.empty((B, d, T))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in reversed(range(T)):
        i, f, g, o = cache.gates[t]
        tc = cache.cell_tanh[t]
        c_prev = cache.cells[t - 1] if t > 0 else np.zeros((B, H))
        dh = dh_all[:, :, t] + dh_next
        dc = dh * o * (1.0 - tc**2) + dc_next
        dz = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dc * i * (1.0 - g**2),
                dh * tc * o * (1.0 - o),
            ],
            axis=1,
        )
        dW += dz.T @ cache.inputs[t]
        db += dz.sum(axis=0)
        d_inputs = dz @ layer.W
        dx[:, :, t] = d_inputs[:, :d]
        dh_next = d_inputs[:, d:]
        dc_next = dc * f

    return _restore(dx, cache.squeezed), {"W": dW, "b": db}


def dense_forward(head: DenseHead, x: np.ndarray) -> Tuple[np.ndarray, DenseCache]:
    """Per-column affine map, optionally followed by exp clamped to [1e-6, 1e6]."""
    x3, squeezed = _as_batch(x)
    if x3.shape[1] != head.input_dim:
        raise InvalidArgumentException(
            f"dense head expects {head.input_dim} input features, got {x3.shape[1]}"
        )
    a = np.einsum("od,bdt->bot", head.W, x3) + head.b[None, :, None]
    active = None
    if head.activation is Activation.EXP_CLAMPED:
        with np.errstate(over="ignore"):
            raw = np.exp(a)
        active = (raw > VARIANCE_FLOOR) & (raw < VARIANCE_CEILING)
        y = np.clip(raw, VARIANCE_FLOOR, VARIANCE_CEILING)
    else:
        y = a
    cache = DenseCache(x3, y, active, _fingerprint(head.W, head.b), squeezed)
    return _restore(y, squeezed), cache


def dense_backward(
    head: DenseHead, cache: DenseCache, upstream: np.ndarray
) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    _check_cache(head.W, head.b, cache.fingerprint)
    g, _ = _as_batch(upstream)
    if g.shape != cache.outputs.shape:
        raise InvalidArgumentException(
            f"upstream gradient shape {g.shape} does not match outputs {cache.outputs.shape}"
        )
    if cache.active is not None:
        # clamped entries pass no gradient
        g = g * cache.outputs * cache.active
    dW = np.einsum("bot,bdt->od", g, cache.inputs)
    db = g.sum(axis=(0, 2))
    dx = np.einsum("od,bot->bdt", head.W, g)
    return _restore(dx, cache.squeezed), {"W": dW, "b": db}


@dataclass
class AdamState:
    """Moment estimates per parameter; counts hold how many updates each parameter has seen."""

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update, minimizing; parameters change in place."""
    missing = set(grads) - set(params)
    if missing:
        raise InvalidArgumentException(f"gradients for unknown parameters: {sorted(missing)}")
    state.step += 1
    for name, grad in grads.items():
        param = params[name]
        if grad.shape != param.shape:
            raise InvalidArgumentException(
                f"gradient for {name} has shape {grad.shape}, parameter has {param.shape}"
            )
        count = state.counts.get(name, 0) + 1
        state.counts[name] = count
        correction1 = 1.0 - beta1**count
        correction2 = 1.0 - beta2**count
        m = state.m.setdefault(name, np.zeros_like(param))
        v = state.v.setdefault(name, np.zeros_like(param))
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad**2
        param -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return params, state


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_error: float
    worst_parameter: Optional[str]
    worst_index: Optional[Tuple[int, ...]]
    checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def grad_check(
    fn: Callable[[Dict[str, np.ndarray]], Tuple[float, Dict[str, np.ndarray]]],
    params: Dict[str, np.ndarray],
    tolerance: float = 1e-5,
    h: float = 1e-5,
    floor: float = 1e-3,
    max_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> GradCheckReport:
    """Compare analytic gradients against central differences.

    fn returns (value, gradients) for the given parameters. The per-coordinate
    error is |a − n| / max(|a| + |n|, floor·g_max), where g_max is the largest
    analytic magnitude. With max_coords set, that many coordinates per
    parameter are drawn at random.
    """
    value, analytic = fn(params)
    if not np.isfinite(value):
        raise GradientCheckException("objective is not finite at the base point", None, None)
    g_max = max((float(np.abs(g).max()) for g in analytic.values() if g.size), default=0.0)
    scale = max(floor * g_max, 1e-12)
    rng = rng or np.random.default_rng(0)

    worst = (0.0, None, None)
    checked = 0
    for name, param in params.items():
        if name not in analytic:
            raise InvalidArgumentException(f"no analytic gradient for {name}")
        flat_count = param.size
        if max_coords is not None and flat_count > max_coords:
            coords = rng.choice(flat_count, size=max_coords, replace=False)
        else:
            coords = np.arange(flat_count)
        for flat in coords:
            index = np.unravel_index(int(flat), param.shape)
            original = param[index]
            param[index] = original + h
            plus, _ = fn(params)
            param[index] = original - h
            minus, _ = fn(params)
            param[index] = original
            if not (np.isfinite(plus) and np.isfinite(minus)):
                raise GradientCheckException(
                    f"non-finite objective while perturbing {name}{list(index)}",
                    name,
                    tuple(int(i) for i in index),
                )
            numeric = (plus - minus) / (2.0 * h)
            exact = float(analytic[name][index])
            rel = abs(exact - numeric) / max(abs(exact) + abs(numeric), scale)
            checked += 1
            if rel > worst[0]:
                worst = (rel, name, tuple(int(i) for i in index))

    report = GradCheckReport(worst[0], worst[1], worst[2], checked, tolerance)
    logger.debug("grad_check: %d coordinates, max rel error %.3g", checked, report.max_rel_error)
    return report
