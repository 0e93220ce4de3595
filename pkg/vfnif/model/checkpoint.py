"""
Checkpoint file layout:

    b"VFNCKPT1" | header length (uint64, little-endian) | UTF-8 JSON header | payload

The header holds the run config echo, the step counter and a manifest
name -> {"shape", "offset"} into the payload of little-endian float64
values. Optimizer moments are stored as "optimizer.m.<name>" and
"optimizer.v.<name>" entries of the same manifest.
"""
from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vfnif.errors import CheckpointError
from vfnif.numerics import ParameterStore

logger = logging.getLogger(__name__)

MAGIC = b"VFNCKPT1"
FORMAT_VERSION = 1
_M = "optimizer.m."
_V = "optimizer.v."
_DTYPE = np.dtype("<f8")


@dataclass
class Checkpoint:
    config: dict
    step: int
    params: ParameterStore
    moments_m: dict[str, np.ndarray] = field(default_factory=dict)
    moments_v: dict[str, np.ndarray] = field(default_factory=dict)


def save_checkpoint(
    path: str | Path,
    params: ParameterStore,
    config: dict,
    step: int = 0,
    moments_m: dict[str, np.ndarray] | None = None,
    moments_v: dict[str, np.ndarray] | None = None,
) -> Path:
    tensors: dict[str, np.ndarray] = dict(params.items())
    for prefix, moments in ((_M, moments_m or {}), (_V, moments_v or {})):
        tensors.update({prefix + name: arr for name, arr in moments.items()})

    manifest, chunks, offset = {}, [], 0
    for name, arr in tensors.items():
        data = np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()
        manifest[name] = {"shape": list(arr.shape), "offset": offset}
        chunks.append(data)
        offset += len(data)

    header = json.dumps(
        {"format": FORMAT_VERSION, "config": config, "step": int(step), "parameters": manifest},
        sort_keys=True,
    ).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for chunk in chunks:
            fh.write(chunk)
    tmp.replace(path)
    logger.info("Saved checkpoint %s (step %d)", path, step)
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc.strerror}") from None
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint (bad magic)")
    if len(raw) < 16:
        raise CheckpointError(f"{path}: truncated header")
    (header_len,) = struct.unpack("<Q", raw[8:16])
    try:
        header = json.loads(raw[16:16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointError(f"{path}: corrupt JSON header") from None

    payload = memoryview(raw)[16 + header_len:]
    params = ParameterStore()
    moments_m, moments_v = {}, {}
    for name, entry in header.get("parameters", {}).items():
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        start = entry["offset"]
        end = start + count * _DTYPE.itemsize
        if end > len(payload):
            raise CheckpointError(f"{path}: payload too short for {name!r}")
        arr = np.frombuffer(payload[start:end], dtype=_DTYPE).reshape(shape).astype(np.float64)
        if name.startswith(_M):
            moments_m[name[len(_M):]] = arr
        elif name.startswith(_V):
            moments_v[name[len(_V):]] = arr
        else:
            params[name] = arr
    return Checkpoint(
        config=header.get("config", {}),
        step=int(header.get("step", 0)),
        params=params,
        moments_m=moments_m,
        moments_v=moments_v,
    )


def shape_diff(expected: ParameterStore, actual: ParameterStore) -> list[str]:
    """Human-readable differences between two parameter layouts."""
    want, have = expected.shapes(), actual.shapes()
    lines = [f"missing {name} {list(shape)}" for name, shape in want.items() if name not in have]
    lines += [f"unexpected {name} {list(shape)}" for name, shape in have.items() if name not in want]
    lines += [
        f"{name}: expected {list(want[name])}, found {list(have[name])}"
        for name in want
        if name in have and want[name] != have[name]
    ]
    return lines


def check_compatible(expected: ParameterStore, checkpoint: Checkpoint) -> None:
    diff = shape_diff(expected, checkpoint.params)
    if diff:
        raise CheckpointError("checkpoint does not match the model config:\n  " + "\n  ".join(diff))
