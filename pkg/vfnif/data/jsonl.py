"""
Line-delimited JSON chain sets:
{"name": ..., "seq": ..., "coords": {"N": [[x, y, z], ...], "CA": ..., "C": ..., "O": ...}}
plus an optional split manifest {"train": [...], "validation": [...], "test": [...]}.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vfnif.data.alphabet import decode, encode
from vfnif.data.structure import ATOM_NAMES, BackboneStructure
from vfnif.errors import DatasetFormatError

logger = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")


@dataclass
class DatasetSplit:
    records: list[BackboneStructure]
    splits: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: dict[str, str] = {}
        for label, names in self.splits.items():
            if label not in SPLITS:
                raise DatasetFormatError(f"unknown split label {label!r}")
            for name in names:
                if name in seen and seen[name] != label:
                    raise DatasetFormatError(
                        f"{name!r} appears in both {seen[name]!r} and {label!r}"
                    )
                seen[name] = label

    def split(self, label: str) -> list[BackboneStructure]:
        if label not in SPLITS:
            raise KeyError(label)
        if not self.splits:
            return list(self.records) if label == "train" else []
        wanted = set(self.splits.get(label, []))
        return [r for r in self.records if r.name in wanted]


def _atom_rows(value, expected: int, atom: str, line_number: int) -> np.ndarray:
    if not isinstance(value, list) or len(value) != expected:
        raise DatasetFormatError(
            f"coords[{atom!r}] must be a list of {expected} entries", line_number=line_number
        )
    rows = np.full((expected, 3), np.nan)
    for i, entry in enumerate(value):
        if entry is None:
            continue
        if not isinstance(entry, list) or len(entry) != 3:
            raise DatasetFormatError(
                f"coords[{atom!r}][{i}] must be [x, y, z] or null", line_number=line_number
            )
        if any(c is None for c in entry):
            continue
        try:
            xyz = [float(c) for c in entry]
        except (TypeError, ValueError):
            raise DatasetFormatError(
                f"coords[{atom!r}][{i}] is not numeric", line_number=line_number
            ) from None
        if all(math.isfinite(c) for c in xyz):
            rows[i] = xyz
    return rows


def parse_record(obj: dict, line_number: int | None = None) -> BackboneStructure:
    try:
        name = obj["name"]
        seq = obj["seq"]
        coords = obj["coords"]
    except (KeyError, TypeError) as exc:
        raise DatasetFormatError(f"missing field {exc}", line_number=line_number) from None
    if not isinstance(name, str) or not isinstance(seq, str) or not isinstance(coords, dict):
        raise DatasetFormatError("name/seq must be strings and coords an object", line_number=line_number)

    n = len(seq)
    atoms = np.stack(
        [_atom_rows(coords.get(atom), n, atom, line_number) for atom in ATOM_NAMES], axis=1
    )
    complete = np.all(np.isfinite(atoms[:, :3]), axis=(1, 2))
    ids = [str(i + 1) for i in range(n)]
    dropped = [rid for rid, ok in zip(ids, complete) if not ok]
    if dropped:
        logger.warning("Dropping %d residue(s) of %s without N/CA/C: %s", len(dropped), name, ", ".join(dropped))
    if not complete.any():
        raise DatasetFormatError(f"{name}: no residue has complete N/CA/C", line_number=line_number)

    return BackboneStructure(
        name=name,
        sequence=np.array(encode(seq), dtype=np.int64)[complete],
        coords=atoms[complete],
        chain=str(obj.get("chain", "A")),
        residue_ids=[rid for rid, ok in zip(ids, complete) if ok],
        dropped=dropped,
    )


def read_split_manifest(path: str | Path) -> dict[str, list[str]]:
    try:
        manifest = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"split manifest {path} is not valid JSON: {exc}") from None
    if not isinstance(manifest, dict):
        raise DatasetFormatError(f"split manifest {path} must be a JSON object")
    return {label: list(names) for label, names in manifest.items()}


def read_jsonl(path: str | Path, split_manifest: str | Path | None = None) -> DatasetSplit:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"malformed JSON: {exc.msg}", line_number=line_number) from None
            records.append(parse_record(obj, line_number=line_number))

    splits = read_split_manifest(split_manifest) if split_manifest else {}
    known = {r.name for r in records}
    for label, names in splits.items():
        missing = [n for n in names if n not in known]
        if missing:
            logger.warning("Split %r names %d structure(s) absent from %s", label, len(missing), path)
    return DatasetSplit(records=records, splits=splits)


def to_record(structure: BackboneStructure) -> dict:
    coords = {}
    for atom_index, atom in enumerate(ATOM_NAMES):
        rows = structure.coords[:, atom_index]
        coords[atom] = [
            [float(v) for v in row] if np.all(np.isfinite(row)) else None for row in rows
        ]
    return {
        "name": structure.name,
        "seq": decode(structure.sequence),
        "chain": structure.chain,
        "coords": coords,
    }


def write_jsonl(structures, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for structure in structures:
            fh.write(json.dumps(to_record(structure)) + "\n")
