"""
Slow, loop-based reference computations. Nothing here touches the tape;
every oracle works on plain arrays so it can be compared against the
vectorized layer code.
"""
import math

import numpy as np
from scipy.special import erf

LAYER_NORM_EPS = 1e-12
COSINE_EPS = 1e-8


def vector_field_loop(qi: np.ndarray, kj: np.ndarray, wa: np.ndarray, wb: np.ndarray) -> np.ndarray:
    d_q = wa.shape[0]
    out = np.zeros((d_q, 3))
    for k in range(d_q):
        for l in range(d_q):
            out[k] += wa[k, l] * qi[l]
        for l in range(d_q):
            out[k] += wb[k, l] * kj[l]
    return out


def selector_weights(d_q: int, k: int, l: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """wa picks qi[l] into row k, wb subtracts kj[m]: row k becomes the displacement qi[l] - kj[m]."""
    wa = np.zeros((d_q, d_q))
    wb = np.zeros((d_q, d_q))
    wa[k, l] = 1.0
    wb[k, m] = -1.0
    return wa, wb


def v_mlp_loop(
    qi: np.ndarray,
    qo: np.ndarray,
    wc: np.ndarray,
    wd: np.ndarray,
    we: np.ndarray,
    gate_dirs: np.ndarray,
) -> np.ndarray:
    d_q = wc.shape[0]
    v = [np.zeros(3) for _ in range(d_q)]
    for k in range(d_q):
        for l in range(d_q):
            v[k] = v[k] + wc[k, l] * qi[l] + wd[k, l] * qo[l]
    u = []
    for k in range(d_q):
        w = gate_dirs[k]
        norm_w = math.sqrt(float(w @ w))
        norm_v = math.sqrt(float(v[k] @ v[k]))
        if norm_w <= COSINE_EPS or norm_v <= COSINE_EPS:
            cos = 0.0
        else:
            cos = float(w @ v[k]) / (norm_w * norm_v)
        u.append(cos * v[k])
    e = np.zeros((d_q, 3))
    for m in range(d_q):
        for k in range(d_q):
            e[m] += we[m, k] * u[k]
    return e


def aggregate_loop(attention: np.ndarray, neighbor_atoms: np.ndarray) -> np.ndarray:
    """attention (n, k, heads), neighbor_atoms (n, k, d_q, 3)."""
    n, k, heads = attention.shape
    out = np.zeros((n,) + neighbor_atoms.shape[2:])
    for i in range(n):
        for slot in range(k):
            weight = sum(attention[i, slot, h] for h in range(heads)) / heads
            out[i] += weight * neighbor_atoms[i, slot]
    return out


# ── Dense node interaction ─────────────────────────────────────────────────

def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


def _mlp(x: np.ndarray, params, prefix: str) -> np.ndarray:
    hidden = _gelu(x @ params[f"{prefix}.0.w"] + params[f"{prefix}.0.b"])
    out = hidden @ params[f"{prefix}.1.w"]
    bias = f"{prefix}.1.b"
    return out + params[bias] if bias in params else out


def _layer_norm(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean()
    return centered / math.sqrt(float((centered ** 2).mean()) + LAYER_NORM_EPS)


def dense_node_interaction(
    s: np.ndarray,
    e: np.ndarray,
    geometry: np.ndarray,
    params,
    prefix: str,
    heads: int,
    normalize: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Complete-graph reference over dense (n, n, .) edge and geometry arrays,
    GELU MLPs. Returns updated node features and attention (n, n, heads)
    indexed by true neighbor j.
    """
    n, d_v = s.shape
    width = d_v // heads
    out = np.zeros_like(s)
    attention = np.zeros((n, n, heads))
    for i in range(n):
        logits = np.stack([
            _mlp(np.concatenate([s[i], s[j], geometry[i, j], e[i, j]]), params, f"{prefix}.attn")
            for j in range(n)
        ])
        for h in range(heads):
            column = np.exp(logits[:, h] - logits[:, h].max())
            attention[i, :, h] = column / column.sum()
        aggregate = np.zeros(d_v)
        for j in range(n):
            value = _mlp(np.concatenate([s[j], geometry[i, j], e[i, j]]), params, f"{prefix}.value")
            for h in range(heads):
                block = slice(h * width, (h + 1) * width)
                aggregate[block] += attention[i, j, h] * value[block]
        if normalize:
            aggregate = _layer_norm(aggregate)
        out[i] = s[i] + _mlp(aggregate, params, f"{prefix}.node_out")
    return out, attention
