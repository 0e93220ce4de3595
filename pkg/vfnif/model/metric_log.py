"""Append-only line-delimited JSON metric log, one writer per process."""
import json
import logging
import pathlib
from typing import TextIO

logger = logging.getLogger(__name__)

_log: TextIO | None = None
_path: pathlib.Path | None = None


def get_metric_log() -> TextIO:
    if _log is None:
        raise RuntimeError("Metric log not opened. Call open_metric_log() first.")
    return _log


def open_metric_log(path: str | pathlib.Path, append: bool = False) -> None:
    global _log, _path
    close_metric_log()
    _path = pathlib.Path(path)
    _path.parent.mkdir(parents=True, exist_ok=True)
    _log = open(_path, "a" if append else "w", encoding="utf-8")
    logger.info("Writing metrics to %s", _path)


def append_metrics(entry: dict) -> None:
    fh = get_metric_log()
    fh.write(json.dumps(entry, sort_keys=True) + "\n")
    fh.flush()


def read_metric_log(path: str | pathlib.Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def close_metric_log() -> None:
    global _log, _path
    if _log is not None:
        _log.close()
        _log = None
        _path = None
