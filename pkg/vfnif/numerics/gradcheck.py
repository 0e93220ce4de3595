from typing import Callable

import numpy as np

from vfnif.errors import NonDeterministicError
from vfnif.numerics.graph import DiffGraph, ParameterStore
from vfnif.numerics.tensor import Tensor

ScalarFn = Callable[[DiffGraph, ParameterStore], Tensor]


def _evaluate(f: ScalarFn, params: ParameterStore) -> float:
    return f(DiffGraph(params), params).item()


def finite_difference_check(
    f: ScalarFn,
    params: ParameterStore,
    eps: float = 1e-5,
    max_entries: int | None = None,
    seed: int = 0,
) -> float:
    """
    Compares tape gradients of f against central differences.

    Returns the worst per-parameter relative error
    ||analytic - numeric|| / (||numeric|| + 1e-8), taken over the checked
    entries. With max_entries set, each parameter contributes at most that
    many entries, sampled deterministically from seed.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-7, 1e-3], got {eps}")

    graph = DiffGraph(params)
    base = f(graph, params)
    analytic = graph.backward(base)
    if _evaluate(f, params) != base.item():
        raise NonDeterministicError("f returned different values on repeated evaluation")

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in list(params):
        arr = params[name]
        flat = arr.reshape(-1)
        entries = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            entries = np.sort(rng.choice(flat.size, size=max_entries, replace=False))

        numeric = np.empty(entries.size)
        for out_idx, idx in enumerate(entries):
            original = flat[idx]
            try:
                flat[idx] = original + eps
                plus = _evaluate(f, params)
                flat[idx] = original - eps
                minus = _evaluate(f, params)
            finally:
                flat[idx] = original
            numeric[out_idx] = (plus - minus) / (2.0 * eps)

        exact = analytic[name].reshape(-1)[entries]
        error = np.linalg.norm(exact - numeric) / (np.linalg.norm(numeric) + 1e-8)
        worst = max(worst, float(error))
    return worst
