from __future__ import annotations

import logging
from collections.abc import Iterable

from vfnif.data.structure import BackboneStructure
from vfnif.model.config import ModelConfig
from vfnif.model.graph import ResidueGraph
from vfnif.model.metrics import EvalReport, metrics
from vfnif.model.network import forward
from vfnif.numerics import ParameterStore

logger = logging.getLogger(__name__)


def evaluate(
    structures: Iterable[BackboneStructure | ResidueGraph],
    cfg: ModelConfig,
    params: ParameterStore,
) -> EvalReport:
    report = EvalReport()
    for item in structures:
        pred = forward(item, cfg, params)
        name = item.name
        if name in report.per_protein:
            name = f"{name}#{len(report.per_protein)}"
        report.per_protein[name] = metrics(pred, item.sequence)
    return report
