from vfnif.layers.atoms import aggregate_atoms, update_atoms_aggregate, update_atoms_linear, v_mlp
from vfnif.layers.interactions import NodeUpdate, edge_interaction, mlp, node_interaction
from vfnif.layers.layer import init_layer, vfn_layer
from vfnif.layers.operator import (
    RbfConfig,
    featurize,
    rbf_numpy,
    transform_atoms,
    transform_neighbor_atoms,
    vector_field,
)
from vfnif.layers.params import (
    VectorFieldWeights,
    VMlpWeights,
    count_vmlp_parameters,
)

__all__ = [
    "NodeUpdate",
    "RbfConfig",
    "VMlpWeights",
    "VectorFieldWeights",
    "aggregate_atoms",
    "count_vmlp_parameters",
    "edge_interaction",
    "featurize",
    "init_layer",
    "mlp",
    "node_interaction",
    "rbf_numpy",
    "transform_atoms",
    "transform_neighbor_atoms",
    "update_atoms_aggregate",
    "update_atoms_linear",
    "v_mlp",
    "vector_field",
    "vfn_layer",
]
