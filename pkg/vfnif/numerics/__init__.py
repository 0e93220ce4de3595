from vfnif.numerics.gradcheck import finite_difference_check
from vfnif.numerics.graph import DiffGraph, ParameterStore, backward, record
from vfnif.numerics.ops import OpKind
from vfnif.numerics.optim import OneCycleSchedule, OptimizerState, adamw_step
from vfnif.numerics.tensor import Tensor

__all__ = [
    "DiffGraph",
    "OneCycleSchedule",
    "OpKind",
    "OptimizerState",
    "ParameterStore",
    "Tensor",
    "adamw_step",
    "backward",
    "finite_difference_check",
    "record",
]
