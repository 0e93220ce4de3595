from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum

from vfnif.errors import ConfigError


class AtomUpdateMode(str, Enum):
    LINEAR = "linear"
    AGGREGATE = "aggregate"


class Activation(str, Enum):
    GELU = "gelu"
    RELU = "relu"


class VMlpVariant(str, Enum):
    VMLP = "vmlp"
    MLP = "mlp"
    NONE = "none"


_ENUMS = {
    "atom_update_mode": AtomUpdateMode,
    "activation": Activation,
    "vmlp_variant": VMlpVariant,
}


@dataclass(frozen=True)
class ModelConfig:
    n_layers: int = 15
    d_q: int = 32
    d_v: int = 128
    d_e: int = 128
    knn_k: int = 30
    n_rbf: int = 16
    heads: int = 4
    atom_update_mode: AtomUpdateMode = AtomUpdateMode.LINEAR
    use_edge_featurizer: bool = False
    activation: Activation = Activation.GELU
    rbf_max: float = 50.0
    vmlp_variant: VMlpVariant = VMlpVariant.VMLP
    use_rbf: bool = True
    use_direction: bool = True
    use_vector_field: bool = True
    edge_uses_geometry: bool = True
    # Non-affine layer norm on the attention aggregate and before the head.
    normalize_features: bool = False

    def __post_init__(self) -> None:
        for key, enum in _ENUMS.items():
            value = getattr(self, key)
            try:
                object.__setattr__(self, key, enum(value))
            except ValueError:
                choices = ", ".join(e.value for e in enum)
                raise ConfigError(f"model.{key}: {value!r} is not one of {choices}") from None
        for key in ("n_layers", "d_v", "d_e", "knn_k", "n_rbf", "heads"):
            if getattr(self, key) < 1:
                raise ConfigError(f"model.{key} must be positive")
        if self.d_v % self.heads:
            raise ConfigError(f"model.d_v ({self.d_v}) must be divisible by heads ({self.heads})")
        if self.d_q < 5:
            raise ConfigError(f"model.d_q must be at least 5, got {self.d_q}")
        if self.rbf_max <= 0:
            raise ConfigError("model.rbf_max must be positive")

    @property
    def head_width(self) -> int:
        return self.d_v // self.heads

    @property
    def feature_width(self) -> int:
        """Per-vector width of the geometric features."""
        if not (self.use_direction or self.use_rbf):
            return 3
        return (3 if self.use_direction else 0) + (self.n_rbf if self.use_rbf else 1)

    @property
    def d_g(self) -> int:
        return self.d_q * self.feature_width if self.use_vector_field else 0

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.value if isinstance(value, Enum) else value
        return out

    @classmethod
    def from_dict(cls, data: dict, path: str = "model") -> ModelConfig:
        return cls(**checked_keys(cls, data, path))


def checked_keys(cls, data: dict, path: str) -> dict:
    """Rejects keys the dataclass does not declare."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(f'{path}.{k}' for k in unknown)}")
    return dict(data)
