#!/usr/bin/env python3
"""
CSV and JSON outputs of the harness commands

CSV bodies depend only on the computed values: floats are written with repr
(shortest round-trip form, '.' decimal, "inf"/"nan" literals), so two runs of
the same configuration produce byte-identical files. Run summaries carry the
timestamped status envelope used by the MCP tools.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

import numpy as np

from koopman.metrics import SWEEP_COLUMNS, SweepRow
from tools.base import ToolBase

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_sweep(path: Path, rows: Sequence[SweepRow]) -> Path:
    return write_csv(path, SWEEP_COLUMNS, ([getattr(r, c) for c in SWEEP_COLUMNS] for r in rows))


def write_trajectories(path: Path, times: np.ndarray, series: Mapping[str, np.ndarray]) -> Path:
    """
    Time series side by side.

    Args:
        series: prefix -> (T x n) states; columns become prefix_x1 .. prefix_xn (x1 .. xn for "")
    """
    header = ["t"]
    blocks = []
    for prefix, states in series.items():
        states = np.atleast_2d(np.asarray(states, dtype=float))
        header += [f"{prefix}_x{k + 1}" if prefix else f"x{k + 1}" for k in range(states.shape[1])]
        blocks.append(states)
    stacked = np.column_stack([np.asarray(times, dtype=float), *blocks])
    return write_csv(path, header, stacked.tolist())


def write_summary(path: Path, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = ToolBase.create_success_response(payload)
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote summary to {path}")
    return path


def status_counts(rows: Sequence[Any]) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for row in rows:
        counts[row.status] = counts.get(row.status, 0) + 1
    return counts
