from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from vfnif.errors import NonFiniteError
from vfnif.numerics.graph import ParameterStore


@dataclass(frozen=True)
class OneCycleSchedule:
    """Linear warm-up from peak/25 to peak, then cosine anneal to peak*1e-5."""

    peak_lr: float = 1e-3
    total_steps: int = 1000
    warmup_fraction: float = 0.3
    div_factor: float = 25.0
    final_fraction: float = 1e-5

    def __post_init__(self) -> None:
        if self.total_steps < 1:
            raise ValueError("total_steps must be at least 1")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1]")

    def lr(self, step: int) -> float:
        """Learning rate for the step-th update (0-based)."""
        start = self.peak_lr / self.div_factor
        end = self.peak_lr * self.final_fraction
        warmup = int(round(self.warmup_fraction * self.total_steps))
        if step < warmup:
            return start + (self.peak_lr - start) * step / warmup
        decay = max(self.total_steps - warmup, 1)
        progress = min((step - warmup) / decay, 1.0)
        return end + 0.5 * (self.peak_lr - end) * (1.0 + math.cos(math.pi * progress))


@dataclass
class OptimizerState:
    schedule: OneCycleSchedule = field(default_factory=OneCycleSchedule)
    weight_decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def ensure_buffers(self, params: ParameterStore) -> None:
        for name, arr in params.items():
            if name not in self.m or self.m[name].shape != arr.shape:
                self.m[name] = np.zeros_like(arr)
                self.v[name] = np.zeros_like(arr)


def adamw_step(
    state: OptimizerState,
    params: ParameterStore,
    gradients: dict[str, np.ndarray],
) -> ParameterStore:
    """
    One AdamW update with decoupled weight decay. A non-finite gradient
    aborts the step before any parameter is touched.
    """
    for name, grad in gradients.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"Non-finite gradient for parameter {name!r}")

    state.ensure_buffers(params)
    lr = state.schedule.lr(state.step)
    state.step += 1
    t = state.step
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t

    for name, arr in params.items():
        grad = gradients.get(name)
        if grad is None:
            grad = np.zeros_like(arr)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        arr -= lr * state.weight_decay * arr
        arr -= lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
    return params
