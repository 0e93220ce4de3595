"""Parameter initialization and the weight bundles bound onto a tape."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vfnif.numerics import DiffGraph, ParameterStore, Tensor


@dataclass(frozen=True)
class VectorFieldWeights:
    wa: Tensor
    wb: Tensor

    @classmethod
    def bind(cls, g: DiffGraph, prefix: str) -> VectorFieldWeights:
        return cls(g.param(f"{prefix}.wa"), g.param(f"{prefix}.wb"))


@dataclass(frozen=True)
class VMlpWeights:
    wc: Tensor
    wd: Tensor
    we: Tensor
    gate_dirs: Tensor

    @classmethod
    def bind(cls, g: DiffGraph, prefix: str) -> VMlpWeights:
        return cls(
            g.param(f"{prefix}.wc"),
            g.param(f"{prefix}.wd"),
            g.param(f"{prefix}.we"),
            g.param(f"{prefix}.gate_dirs"),
        )


# ── Initializers ───────────────────────────────────────────────────────────

def init_linear(
    params: ParameterStore,
    rng: np.random.Generator,
    prefix: str,
    d_in: int,
    d_out: int,
    std: float | None = None,
    bias: bool = True,
) -> None:
    std = 1.0 / math.sqrt(d_in) if std is None else std
    params[f"{prefix}.w"] = rng.normal(0.0, std, size=(d_in, d_out))
    if bias:
        params[f"{prefix}.b"] = np.zeros(d_out)


def init_mlp(
    params: ParameterStore,
    rng: np.random.Generator,
    prefix: str,
    d_in: int,
    d_hidden: int,
    d_out: int,
    bias: bool = True,
) -> None:
    init_linear(params, rng, f"{prefix}.0", d_in, d_hidden)
    init_linear(params, rng, f"{prefix}.1", d_hidden, d_out, bias=bias)


def init_vector_field(params: ParameterStore, rng: np.random.Generator, prefix: str, d_q: int) -> None:
    std = 1.0 / math.sqrt(d_q)
    params[f"{prefix}.wa"] = rng.normal(0.0, std, size=(d_q, d_q))
    params[f"{prefix}.wb"] = rng.normal(0.0, std, size=(d_q, d_q))


def init_vmlp(params: ParameterStore, rng: np.random.Generator, prefix: str, d_q: int) -> None:
    std = 1.0 / math.sqrt(d_q)
    for key in ("wc", "wd", "we"):
        params[f"{prefix}.{key}"] = rng.normal(0.0, std, size=(d_q, d_q))
    dirs = rng.normal(size=(d_q, 3))
    params[f"{prefix}.gate_dirs"] = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)


def count_vmlp_parameters(d_q: int) -> int:
    """wc, wd, we are d_q x d_q; one 3-vector gate direction per output vector."""
    return 3 * d_q * d_q + 3 * d_q
