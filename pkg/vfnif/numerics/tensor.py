from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from vfnif.numerics.graph import DiffGraph


class Tensor:
    """
    Immutable float64 array recorded on a DiffGraph.
    Constants carry requires_grad=False; parameters bound through
    DiffGraph.param() and everything computed from them carry True.
    """

    __slots__ = ("value", "requires_grad", "name", "graph")

    def __init__(
        self,
        value,
        requires_grad: bool = False,
        name: str = "",
        graph: DiffGraph | None = None,
    ) -> None:
        arr = np.array(value, dtype=np.float64)
        arr.flags.writeable = False
        self.value = arr
        self.requires_grad = requires_grad
        self.name = name
        self.graph = graph

    @classmethod
    def adopt(
        cls,
        arr: np.ndarray,
        requires_grad: bool,
        name: str = "",
        graph: DiffGraph | None = None,
    ) -> Tensor:
        """Wraps a freshly computed array without copying it."""
        out = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.float64)
        arr.flags.writeable = False
        out.value = arr
        out.requires_grad = requires_grad
        out.name = name
        out.graph = graph
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def item(self) -> float:
        return float(self.value)

    def numpy(self) -> np.ndarray:
        return np.array(self.value)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"
