from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_softmax

from vfnif.data.alphabet import MASK_INDEX, NUM_CLASSES
from vfnif.errors import ShapeError
from vfnif.model.network import SequencePrediction
from vfnif.numerics import Tensor


def _checked_truth(pred: SequencePrediction, truth) -> np.ndarray:
    truth = np.asarray(truth, dtype=np.int64)
    if truth.shape != (len(pred.logits),):
        raise ShapeError(f"truth has {truth.shape} labels for {len(pred.logits)} predicted residues")
    return truth


def loss(pred: SequencePrediction, truth) -> Tensor:
    """Mean token cross-entropy recorded on the prediction's tape. Masked residues are skipped."""
    truth = _checked_truth(pred, truth)
    if pred.graph is None or pred.tensor is None:
        raise ValueError("prediction carries no tape; use cross_entropy() for plain logits")
    return pred.graph.cross_entropy(pred.tensor, truth, ignore_index=MASK_INDEX)


def token_cross_entropy(logits: np.ndarray, truth) -> np.ndarray:
    """Per-residue cross-entropy; masked residues are dropped."""
    truth = np.asarray(truth, dtype=np.int64)
    valid = truth != MASK_INDEX
    bad = valid & ((truth < 0) | (truth >= NUM_CLASSES))
    if bad.any():
        raise ValueError(f"label {int(truth[bad][0])} outside [0, {NUM_CLASSES})")
    log_probs = log_softmax(np.asarray(logits, dtype=np.float64), axis=1)
    rows = np.nonzero(valid)[0]
    return -log_probs[rows, truth[rows]]


@dataclass(frozen=True)
class Metrics:
    perplexity: float
    recovery: float
    n_residues: int
    cross_entropy_sum: float = 0.0
    n_correct: int = 0

    def to_dict(self) -> dict:
        return {"perplexity": self.perplexity, "recovery": self.recovery}


def metrics(pred: SequencePrediction, truth) -> Metrics:
    truth = _checked_truth(pred, truth)
    ce = token_cross_entropy(pred.logits, truth)
    valid = truth != MASK_INDEX
    correct = int(np.sum(pred.predicted[valid] == truth[valid]))
    n = int(valid.sum())
    if n == 0:
        return Metrics(float("nan"), float("nan"), 0)
    return Metrics(
        perplexity=math.exp(float(ce.mean())),
        recovery=100.0 * correct / n,
        n_residues=n,
        cross_entropy_sum=float(ce.sum()),
        n_correct=correct,
    )


@dataclass
class EvalReport:
    per_protein: dict[str, Metrics] = field(default_factory=dict)

    @property
    def n_proteins(self) -> int:
        return len(self.per_protein)

    @property
    def n_residues(self) -> int:
        return sum(m.n_residues for m in self.per_protein.values())

    @property
    def perplexity(self) -> float:
        """Pooled over residues."""
        total = sum(m.cross_entropy_sum for m in self.per_protein.values())
        return math.exp(total / self.n_residues) if self.n_residues else float("nan")

    @property
    def recovery(self) -> float:
        """Global residue-level rate."""
        correct = sum(m.n_correct for m in self.per_protein.values())
        return 100.0 * correct / self.n_residues if self.n_residues else float("nan")

    @property
    def median_recovery(self) -> float:
        scored = [m.recovery for m in self.per_protein.values() if m.n_residues]
        return float(np.median(scored)) if scored else float("nan")

    def to_dict(self) -> dict:
        return {
            "perplexity": self.perplexity,
            "recovery": self.recovery,
            "median_recovery": self.median_recovery,
            "n_proteins": self.n_proteins,
            "n_residues": self.n_residues,
        }
