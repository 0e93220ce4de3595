from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import IntFlag

import numpy as np

from vfnif.data.alphabet import MASK_INDEX, decode
from vfnif.geometry import RigidTransform, apply

logger = logging.getLogger(__name__)

ATOM_NAMES = ("N", "CA", "C", "O")
CHAIN_BREAK_DISTANCE = 10.0
CARBONYL_LENGTH = 1.23


class ResidueFlag(IntFlag):
    NONE = 0
    MISSING_O = 1
    CHAIN_BREAK = 2
    MASKED = 4


@dataclass
class BackboneStructure:
    """
    One chain's backbone. coords is (L, 4, 3) in N/CA/C/O order; a missing O
    is stored as NaN and flagged. Residues without N/CA/C never get here:
    the parsers drop them and record their ids in `dropped`.
    """

    name: str
    sequence: np.ndarray
    coords: np.ndarray
    chain: str = "A"
    flags: np.ndarray | None = None
    residue_ids: list[str] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.sequence = np.asarray(self.sequence, dtype=np.int64)
        self.coords = np.asarray(self.coords, dtype=np.float64)
        n = len(self.sequence)
        if self.coords.shape != (n, 4, 3):
            raise ValueError(
                f"{self.name}: coords shape {self.coords.shape} does not match sequence length {n}"
            )
        if self.flags is None:
            self.flags = np.zeros(n, dtype=np.int64)
        self.flags = np.asarray(self.flags, dtype=np.int64).copy()
        if self.flags.shape != (n,):
            raise ValueError(f"{self.name}: flags length {self.flags.shape} != {n}")
        if not self.residue_ids:
            self.residue_ids = [str(i + 1) for i in range(n)]

        missing_o = ~np.all(np.isfinite(self.coords[:, 3]), axis=-1)
        self.flags[missing_o] |= ResidueFlag.MISSING_O
        self.flags[self.sequence == MASK_INDEX] |= ResidueFlag.MASKED
        if n > 1:
            gaps = np.linalg.norm(np.diff(self.coords[:, 1], axis=0), axis=-1)
            breaks = ~(gaps < CHAIN_BREAK_DISTANCE)
            # Already-flagged breaks (moved copies) are not reported twice.
            fresh = breaks & ~(self.flags[1:] & ResidueFlag.CHAIN_BREAK).astype(bool)
            for i in np.nonzero(fresh)[0]:
                logger.warning(
                    "%s: chain break before residue %s (CA-CA %.2f Å)",
                    self.name, self.residue_ids[i + 1], gaps[i],
                )
            self.flags[1:][breaks] |= ResidueFlag.CHAIN_BREAK

    def __len__(self) -> int:
        return len(self.sequence)

    @property
    def sequence_string(self) -> str:
        return decode(self.sequence)

    def has_flag(self, index: int, flag: ResidueFlag) -> bool:
        return bool(self.flags[index] & flag)

    def moved(self, t: RigidTransform) -> BackboneStructure:
        """Same structure under a global rigid motion."""
        return replace(self, coords=apply(t, self.coords), flags=self.flags.copy())

    def subset(self, keep: np.ndarray) -> BackboneStructure:
        keep = np.asarray(keep, dtype=bool)
        dropped = self.dropped + [rid for rid, k in zip(self.residue_ids, keep) if not k]
        return BackboneStructure(
            name=self.name,
            sequence=self.sequence[keep],
            coords=self.coords[keep],
            chain=self.chain,
            flags=self.flags[keep] & ~ResidueFlag.CHAIN_BREAK,
            residue_ids=[rid for rid, k in zip(self.residue_ids, keep) if k],
            dropped=dropped,
        )


def ideal_oxygen(n: np.ndarray, ca: np.ndarray, c: np.ndarray) -> np.ndarray:
    """
    Idealized carbonyl O for (..., 3) backbone atoms: 1.23 Å from C, in the
    N-CA-C plane, along the bisector of the angle formed at C by CA and N,
    pointing away from both.
    """
    away_ca = c - ca
    away_n = c - n
    away_ca = away_ca / np.linalg.norm(away_ca, axis=-1, keepdims=True)
    away_n = away_n / np.linalg.norm(away_n, axis=-1, keepdims=True)
    bisector = away_ca + away_n
    bisector = bisector / np.linalg.norm(bisector, axis=-1, keepdims=True)
    return c + CARBONYL_LENGTH * bisector
