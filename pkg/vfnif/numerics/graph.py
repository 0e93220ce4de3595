from __future__ import annotations

from collections.abc import Iterator, MutableMapping
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from vfnif.errors import NonFiniteError, ShapeError
from vfnif.numerics.ops import RULES, OpKind
from vfnif.numerics.tensor import Tensor


class ParameterStore(MutableMapping):
    """Named float64 leaf arrays, in insertion order."""

    def __init__(self, arrays: dict[str, np.ndarray] | None = None) -> None:
        self._arrays: dict[str, np.ndarray] = {}
        for name, value in (arrays or {}).items():
            self[name] = value

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, value) -> None:
        self._arrays[name] = np.array(value, dtype=np.float64)

    def __delitem__(self, name: str) -> None:
        del self._arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def __len__(self) -> int:
        return len(self._arrays)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {name: arr.shape for name, arr in self._arrays.items()}

    def size(self, prefix: str = "") -> int:
        return sum(arr.size for name, arr in self._arrays.items() if name.startswith(prefix))

    def copy(self) -> ParameterStore:
        return ParameterStore({name: arr.copy() for name, arr in self._arrays.items()})


@dataclass
class Node:
    kind: OpKind
    inputs: tuple[Tensor, ...]
    output: Tensor
    attrs: dict[str, Any]
    saved: Any


@dataclass
class DiffGraph:
    """
    Reverse-mode tape. Operations are appended in execution order, which is
    a topological order by construction; backward() walks it in reverse.
    Single writer: build one graph per protein and sum the gradients.
    """

    params: ParameterStore | None = None
    nodes: list[Node] = field(default_factory=list)
    _bound: dict[str, list[Tensor]] = field(default_factory=dict)

    # ── Leaves ─────────────────────────────────────────────────────────────

    def param(self, name: str) -> Tensor:
        if self.params is None or name not in self.params:
            raise KeyError(f"Unknown parameter {name!r}")
        tensor = Tensor(self.params[name], requires_grad=True, name=name, graph=self)
        self._bound.setdefault(name, []).append(tensor)
        return tensor

    def constant(self, value, name: str = "") -> Tensor:
        return Tensor(value, requires_grad=False, name=name, graph=self)

    # ── Recording ──────────────────────────────────────────────────────────

    def record(self, kind: OpKind | str, *inputs: Tensor, **attrs) -> Tensor:
        kind = OpKind(kind)
        rule = RULES[kind]
        if rule.arity >= 0 and len(inputs) != rule.arity:
            raise ShapeError(f"{kind.value}: expected {rule.arity} inputs, got {len(inputs)}")
        if not inputs:
            raise ShapeError(f"{kind.value}: no inputs")
        for tensor in inputs:
            if not isinstance(tensor, Tensor):
                raise TypeError(f"{kind.value}: inputs must be Tensors, got {type(tensor).__name__}")
            if tensor.graph is not None and tensor.graph is not self:
                raise ValueError(f"{kind.value}: input {tensor!r} belongs to another graph")

        values = tuple(t.value for t in inputs)
        out_value, saved = rule.forward(values, attrs)
        if not np.all(np.isfinite(out_value)):
            raise NonFiniteError(f"{kind.value}: produced non-finite values")

        requires_grad = any(t.requires_grad for t in inputs)
        out = Tensor.adopt(out_value, requires_grad=requires_grad, graph=self)
        if requires_grad:
            self.nodes.append(Node(kind, tuple(inputs), out, attrs, saved))
        return out

    # ── Reverse pass ───────────────────────────────────────────────────────

    def backward(self, loss: Tensor) -> dict[str, np.ndarray]:
        """
        Returns the total adjoint for every parameter in the store. Parameters
        never bound, or bound but unused by the loss, get zeros.
        """
        if loss.graph is not self:
            raise ValueError("backward: loss was not recorded on this graph")
        if loss.shape != ():
            raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")

        adjoints: dict[int, np.ndarray] = {id(loss): np.ones(())}
        for node in reversed(self.nodes):
            grad_out = adjoints.pop(id(node.output), None)
            if grad_out is None:
                continue
            needs = tuple(t.requires_grad for t in node.inputs)
            grads = RULES[node.kind].backward(
                grad_out, tuple(t.value for t in node.inputs), node.output.value,
                node.saved, node.attrs, needs,
            )
            for tensor, grad in zip(node.inputs, grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                prev = adjoints.get(key)
                # Shared subexpressions accumulate.
                adjoints[key] = grad if prev is None else prev + grad

        gradients: dict[str, np.ndarray] = {}
        if self.params is not None:
            for name, arr in self.params.items():
                gradients[name] = np.zeros_like(arr)
        for name, tensors in self._bound.items():
            total = gradients.setdefault(name, np.zeros(tensors[0].shape))
            for tensor in tensors:
                grad = adjoints.get(id(tensor))
                if grad is not None:
                    total += grad
        return gradients

    # ── Convenience wrappers ───────────────────────────────────────────────

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        return self.record(OpKind.MATMUL, a, b)

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        return self.record(OpKind.ADD, a, b)

    def sub(self, a: Tensor, b: Tensor) -> Tensor:
        return self.add(a, self.scale(b, -1.0))

    def multiply(self, a: Tensor, b: Tensor) -> Tensor:
        return self.record(OpKind.MULTIPLY, a, b)

    def divide(self, a: Tensor, b: Tensor) -> Tensor:
        return self.record(OpKind.DIVIDE, a, b)

    def scale(self, a: Tensor, factor: float) -> Tensor:
        return self.record(OpKind.SCALE, a, factor=float(factor))

    def concat(self, tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
        if len(tensors) == 1:
            return tensors[0]
        return self.record(OpKind.CONCAT, *tensors, axis=axis)

    def slice(self, a: Tensor, key) -> Tensor:
        if not isinstance(key, tuple):
            key = (key,)
        return self.record(OpKind.SLICE, a, key=key)

    def reshape(self, a: Tensor, shape: Sequence[int]) -> Tensor:
        return self.record(OpKind.RESHAPE, a, shape=tuple(shape))

    def sum(self, a: Tensor, axis: int | tuple[int, ...] | None = None) -> Tensor:
        return self.record(OpKind.SUM, a, axis=axis)

    def mean(self, a: Tensor, axis: int) -> Tensor:
        return self.scale(self.sum(a, axis=axis), 1.0 / a.shape[axis])

    def relu(self, a: Tensor) -> Tensor:
        return self.record(OpKind.RELU, a)

    def gelu(self, a: Tensor) -> Tensor:
        return self.record(OpKind.GELU, a)

    def exp(self, a: Tensor) -> Tensor:
        return self.record(OpKind.EXP, a)

    def sigmoid(self, a: Tensor) -> Tensor:
        return self.record(OpKind.SIGMOID, a)

    def sqrt(self, a: Tensor) -> Tensor:
        return self.record(OpKind.SQRT, a)

    def normalize(self, a: Tensor) -> Tensor:
        return self.record(OpKind.NORMALIZE, a)

    def softmax(self, a: Tensor, axis: int = -1) -> Tensor:
        return self.record(OpKind.SOFTMAX, a, axis=axis)

    def layer_norm(self, a: Tensor) -> Tensor:
        return self.record(OpKind.LAYER_NORM, a)

    def gather_rows(self, a: Tensor, index) -> Tensor:
        return self.record(OpKind.GATHER_ROWS, a, index=np.asarray(index, dtype=np.int64))

    def cross_entropy(self, logits: Tensor, labels, ignore_index: int | None = None) -> Tensor:
        return self.record(
            OpKind.CROSS_ENTROPY, logits,
            labels=np.asarray(labels, dtype=np.int64), ignore_index=ignore_index,
        )

    def linear(self, x: Tensor, prefix: str) -> Tensor:
        return self.add(self.matmul(x, self.param(f"{prefix}.w")), self.param(f"{prefix}.b"))


def record(graph: DiffGraph, kind: OpKind | str, *inputs: Tensor, **attrs) -> Tensor:
    return graph.record(kind, *inputs, **attrs)


def backward(graph: DiffGraph, loss: Tensor) -> dict[str, np.ndarray]:
    return graph.backward(loss)
