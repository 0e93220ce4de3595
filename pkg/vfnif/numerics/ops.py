"""
Forward and adjoint rules for every op-kind the tape understands.

Each rule receives plain numpy arrays. ``forward`` returns the output array
and whatever it wants to keep for the backward pass; ``backward`` returns one
adjoint per input (``None`` where the input needs no gradient).
"""
import math
from enum import Enum
from typing import Any, Callable, NamedTuple

import numpy as np
from scipy.special import erf, expit

from vfnif.errors import LabelError, NonFiniteError, ShapeError

LAYER_NORM_EPS = 1e-12
NORMALIZE_EPS = 1e-8


class OpKind(str, Enum):
    MATMUL = "matmul"
    ADD = "add"
    MULTIPLY = "multiply"
    SCALE = "scalar-scale"
    CONCAT = "concat"
    SLICE = "slice"
    RESHAPE = "reshape"
    SUM = "sum-over-axis"
    RELU = "relu"
    GELU = "gelu"
    SOFTMAX = "softmax-over-axis"
    LAYER_NORM = "layer-norm"
    SQRT = "sqrt"
    DIVIDE = "divide"
    CROSS_ENTROPY = "cross-entropy-with-logits"
    GATHER_ROWS = "gather-rows"
    EXP = "exp"
    SIGMOID = "sigmoid"
    NORMALIZE = "normalize"


class OpRule(NamedTuple):
    arity: int
    forward: Callable[[tuple[np.ndarray, ...], dict], tuple[np.ndarray, Any]]
    backward: Callable[..., tuple[np.ndarray | None, ...]]


# ── Helpers ────────────────────────────────────────────────────────────────

def _shape_error(kind: OpKind, *shapes: tuple[int, ...], detail: str = "") -> ShapeError:
    joined = " and ".join(str(tuple(s)) for s in shapes)
    suffix = f" ({detail})" if detail else ""
    return ShapeError(f"{kind.value}: incompatible shapes {joined}{suffix}")


def _broadcast_shape(kind: OpKind, a: np.ndarray, b: np.ndarray) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise _shape_error(kind, a.shape, b.shape) from None


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sums an adjoint back down to the shape of a broadcast operand."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _norm_axes(axis, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


# ── Linear algebra ─────────────────────────────────────────────────────────

def _matmul_fwd(xs, attrs):
    a, b = xs
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise _shape_error(OpKind.MATMUL, a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise _shape_error(OpKind.MATMUL, a.shape, b.shape, detail="batch dims") from None
    return np.matmul(a, b), None


def _matmul_bwd(g, xs, out, saved, attrs, needs):
    a, b = xs
    ga = _unbroadcast(np.matmul(g, np.swapaxes(b, -1, -2)), a.shape) if needs[0] else None
    gb = _unbroadcast(np.matmul(np.swapaxes(a, -1, -2), g), b.shape) if needs[1] else None
    return ga, gb


def _add_fwd(xs, attrs):
    a, b = xs
    _broadcast_shape(OpKind.ADD, a, b)
    return a + b, None


def _add_bwd(g, xs, out, saved, attrs, needs):
    a, b = xs
    return (
        _unbroadcast(g, a.shape) if needs[0] else None,
        _unbroadcast(g, b.shape) if needs[1] else None,
    )


def _multiply_fwd(xs, attrs):
    a, b = xs
    _broadcast_shape(OpKind.MULTIPLY, a, b)
    return a * b, None


def _multiply_bwd(g, xs, out, saved, attrs, needs):
    a, b = xs
    return (
        _unbroadcast(g * b, a.shape) if needs[0] else None,
        _unbroadcast(g * a, b.shape) if needs[1] else None,
    )


def _divide_fwd(xs, attrs):
    a, b = xs
    _broadcast_shape(OpKind.DIVIDE, a, b)
    if np.any(b == 0.0):
        raise NonFiniteError(f"{OpKind.DIVIDE.value}: division by zero")
    return a / b, None


def _divide_bwd(g, xs, out, saved, attrs, needs):
    a, b = xs
    return (
        _unbroadcast(g / b, a.shape) if needs[0] else None,
        _unbroadcast(-g * a / (b * b), b.shape) if needs[1] else None,
    )


def _scale_fwd(xs, attrs):
    return xs[0] * attrs["factor"], None


def _scale_bwd(g, xs, out, saved, attrs, needs):
    return (g * attrs["factor"],)


# ── Structural ─────────────────────────────────────────────────────────────

def _concat_fwd(xs, attrs):
    axis = attrs["axis"]
    first = xs[0]
    ax = axis % first.ndim
    for x in xs[1:]:
        if x.ndim != first.ndim or any(
            d1 != d2 for i, (d1, d2) in enumerate(zip(first.shape, x.shape)) if i != ax
        ):
            raise _shape_error(OpKind.CONCAT, first.shape, x.shape, detail=f"axis={axis}")
    return np.concatenate(xs, axis=ax), [x.shape[ax] for x in xs]


def _concat_bwd(g, xs, out, sizes, attrs, needs):
    ax = attrs["axis"] % g.ndim
    splits = np.cumsum(sizes)[:-1]
    parts = np.split(g, splits, axis=ax)
    return tuple(p if need else None for p, need in zip(parts, needs))


def _slice_fwd(xs, attrs):
    key = attrs["key"]
    for item in key:
        if not isinstance(item, (slice, int)) and item is not Ellipsis:
            raise ShapeError(f"{OpKind.SLICE.value}: only basic slices are supported, got {item!r}")
    try:
        return np.array(xs[0][key]), None
    except IndexError as exc:
        raise ShapeError(f"{OpKind.SLICE.value}: {exc} for shape {xs[0].shape}") from None


def _slice_bwd(g, xs, out, saved, attrs, needs):
    grad = np.zeros_like(xs[0])
    grad[attrs["key"]] = g
    return (grad,)


def _reshape_fwd(xs, attrs):
    shape = tuple(attrs["shape"])
    a = xs[0]
    try:
        return a.reshape(shape), None
    except ValueError:
        raise _shape_error(OpKind.RESHAPE, a.shape, shape) from None


def _reshape_bwd(g, xs, out, saved, attrs, needs):
    return (g.reshape(xs[0].shape),)


def _sum_fwd(xs, attrs):
    a = xs[0]
    axis = attrs.get("axis")
    if axis is not None:
        for ax in (axis,) if isinstance(axis, int) else axis:
            if not -a.ndim <= ax < a.ndim:
                raise ShapeError(f"{OpKind.SUM.value}: axis {ax} out of range for shape {a.shape}")
    return np.sum(a, axis=axis), None


def _sum_bwd(g, xs, out, saved, attrs, needs):
    a = xs[0]
    axes = _norm_axes(attrs.get("axis"), a.ndim)
    return (np.broadcast_to(np.expand_dims(g, axes), a.shape),)


def _gather_rows_fwd(xs, attrs):
    a = xs[0]
    index = attrs["index"]
    if a.ndim < 1:
        raise ShapeError(f"{OpKind.GATHER_ROWS.value}: cannot gather rows of a scalar")
    if index.size and (index.min() < 0 or index.max() >= a.shape[0]):
        raise ShapeError(
            f"{OpKind.GATHER_ROWS.value}: index out of range for shape {a.shape}"
        )
    return a[index], None


def _gather_rows_bwd(g, xs, out, saved, attrs, needs):
    grad = np.zeros_like(xs[0])
    np.add.at(grad, attrs["index"], g)
    return (grad,)


# ── Elementwise nonlinearities ─────────────────────────────────────────────

def _relu_fwd(xs, attrs):
    return np.maximum(xs[0], 0.0), None


def _relu_bwd(g, xs, out, saved, attrs, needs):
    return (g * (xs[0] > 0),)


_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _gelu_fwd(xs, attrs):
    a = xs[0]
    cdf = 0.5 * (1.0 + erf(a * _INV_SQRT2))
    return a * cdf, cdf


def _gelu_bwd(g, xs, out, cdf, attrs, needs):
    a = xs[0]
    pdf = np.exp(-0.5 * a * a) * _INV_SQRT2PI
    return (g * (cdf + a * pdf),)


def _exp_fwd(xs, attrs):
    with np.errstate(over="ignore"):
        return np.exp(xs[0]), None


def _exp_bwd(g, xs, out, saved, attrs, needs):
    return (g * out,)


def _sigmoid_fwd(xs, attrs):
    return expit(xs[0]), None


def _sigmoid_bwd(g, xs, out, saved, attrs, needs):
    return (g * out * (1.0 - out),)


def _sqrt_fwd(xs, attrs):
    a = xs[0]
    if np.any(a < 0):
        raise NonFiniteError(f"{OpKind.SQRT.value}: negative input")
    return np.sqrt(a), None


def _sqrt_bwd(g, xs, out, saved, attrs, needs):
    # sqrt(0) gets a zero subgradient.
    positive = out > 0
    safe = np.where(positive, out, 1.0)
    return (np.where(positive, g / (2.0 * safe), 0.0),)


def _normalize_fwd(xs, attrs):
    a = xs[0]
    norm = np.linalg.norm(a, axis=-1, keepdims=True)
    keep = norm > NORMALIZE_EPS
    safe = np.where(keep, norm, 1.0)
    return np.where(keep, a / safe, 0.0), (safe, keep)


def _normalize_bwd(g, xs, out, saved, attrs, needs):
    safe, keep = saved
    proj = np.sum(g * out, axis=-1, keepdims=True)
    return (np.where(keep, (g - out * proj) / safe, 0.0),)


# ── Reductions over an axis ────────────────────────────────────────────────

def _softmax_fwd(xs, attrs):
    a = xs[0]
    axis = attrs.get("axis", -1)
    shifted = a - np.max(a, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True), None


def _softmax_bwd(g, xs, out, saved, attrs, needs):
    axis = attrs.get("axis", -1)
    return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)


def _layer_norm_fwd(xs, attrs):
    a = xs[0]
    mean = a.mean(axis=-1, keepdims=True)
    centered = a - mean
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + LAYER_NORM_EPS)
    return centered * inv_std, inv_std


def _layer_norm_bwd(g, xs, out, inv_std, attrs, needs):
    g_mean = g.mean(axis=-1, keepdims=True)
    gy_mean = (g * out).mean(axis=-1, keepdims=True)
    return (inv_std * (g - g_mean - out * gy_mean),)


def _cross_entropy_fwd(xs, attrs):
    logits = xs[0]
    labels = attrs["labels"]
    ignore = attrs.get("ignore_index")
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise _shape_error(OpKind.CROSS_ENTROPY, logits.shape, labels.shape)
    n_classes = logits.shape[1]
    valid = labels != ignore if ignore is not None else np.ones(labels.shape, dtype=bool)
    bad = valid & ((labels < 0) | (labels >= n_classes))
    if np.any(bad):
        raise LabelError(
            f"{OpKind.CROSS_ENTROPY.value}: label {int(labels[bad][0])} outside [0, {n_classes})"
        )
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise LabelError(f"{OpKind.CROSS_ENTROPY.value}: no supervised rows")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    rows = np.nonzero(valid)[0]
    loss = -log_probs[rows, labels[rows]].sum() / n_valid
    return np.array(loss), (log_probs, rows, n_valid)


def _cross_entropy_bwd(g, xs, out, saved, attrs, needs):
    log_probs, rows, n_valid = saved
    labels = attrs["labels"]
    grad = np.zeros_like(log_probs)
    grad[rows] = np.exp(log_probs[rows])
    grad[rows, labels[rows]] -= 1.0
    return (grad * (g / n_valid),)


RULES: dict[OpKind, OpRule] = {
    OpKind.MATMUL: OpRule(2, _matmul_fwd, _matmul_bwd),
    OpKind.ADD: OpRule(2, _add_fwd, _add_bwd),
    OpKind.MULTIPLY: OpRule(2, _multiply_fwd, _multiply_bwd),
    OpKind.SCALE: OpRule(1, _scale_fwd, _scale_bwd),
    OpKind.CONCAT: OpRule(-1, _concat_fwd, _concat_bwd),
    OpKind.SLICE: OpRule(1, _slice_fwd, _slice_bwd),
    OpKind.RESHAPE: OpRule(1, _reshape_fwd, _reshape_bwd),
    OpKind.SUM: OpRule(1, _sum_fwd, _sum_bwd),
    OpKind.RELU: OpRule(1, _relu_fwd, _relu_bwd),
    OpKind.GELU: OpRule(1, _gelu_fwd, _gelu_bwd),
    OpKind.SOFTMAX: OpRule(1, _softmax_fwd, _softmax_bwd),
    OpKind.LAYER_NORM: OpRule(1, _layer_norm_fwd, _layer_norm_bwd),
    OpKind.SQRT: OpRule(1, _sqrt_fwd, _sqrt_bwd),
    OpKind.DIVIDE: OpRule(2, _divide_fwd, _divide_bwd),
    OpKind.CROSS_ENTROPY: OpRule(1, _cross_entropy_fwd, _cross_entropy_bwd),
    OpKind.GATHER_ROWS: OpRule(1, _gather_rows_fwd, _gather_rows_bwd),
    OpKind.EXP: OpRule(1, _exp_fwd, _exp_bwd),
    OpKind.SIGMOID: OpRule(1, _sigmoid_fwd, _sigmoid_bwd),
    OpKind.NORMALIZE: OpRule(1, _normalize_fwd, _normalize_bwd),
}
