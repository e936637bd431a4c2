"""
Result bundle writers: JSON records and CSV tables.

Every float is written with 12 significant digits and JSON keys are
sorted, so identical inputs give byte-identical files.
"""

import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from config import SIGNIFICANT_DIGITS


def round_floats(obj, digits=SIGNIFICANT_DIGITS):
    """Recursively round floats to ``digits`` significant digits; NaN/inf -> None."""
    if isinstance(obj, dict):
        return {str(k): round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{digits}g}")
    return obj


def dumps_record(record):
    return json.dumps(round_floats(record), sort_keys=True, indent=2) + "\n"


def write_record(path, record):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_record(record), encoding="utf-8", newline="\n")
    return path


def write_table(path, rows, columns=None):
    """Write dict rows (or a DataFrame) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(path, index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g", lineterminator="\n")
    return path


def trace_frame(trace):
    """One row per dynamics round: round, local_flow_<i>, cost_<i> (1-based players)."""
    rows = []
    for rec in trace:
        row = {"round": rec.round}
        for i, flow in enumerate(rec.local_flows):
            row[f"local_flow_{i + 1}"] = float(flow)
        for i, cost in enumerate(rec.actual_costs):
            row[f"cost_{i + 1}"] = float(cost)
        rows.append(row)
    return pd.DataFrame(rows)
