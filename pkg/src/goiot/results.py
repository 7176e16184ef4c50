"""Result tables and their CSV/JSON emission.

Column names carry their unit as a suffix: ``_J`` joules, ``_s`` seconds,
``_B`` bytes, ``_frac`` dimensionless ratio in [0, 1], ``_count`` integer
count, ``_flag`` 0/1.  Unsuffixed columns are text keys.  Floats are written
with 6 significant digits, so the JSON and CSV forms round-trip losslessly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import kpi
from .errors import InputError

SIG_DIGITS = 6

SIMULATION_COLUMNS = (
    "strategy", "kind", "models", "threshold_frac", "frequency_frac", "runs_count",
    *(f"{c}_J" for c in kpi.COMPONENTS),
    "energy_total_J", "energy_total_std_J",
    "latency_radio_s", "latency_transport_s", "latency_routing_s", "latency_processing_s",
    "latency_detection_s", "latency_mean_s",
    "f1_frac", "inaccuracy_frac", "f1_run_std_frac", "data_sent_B",
    "tp_count", "fp_count", "fn_count", "tn_count", "pareto_flag",
)

PLACEMENT_COLUMNS = (
    "family", "candidate", "compute_node", "paths", "objective",
    "eps_latency_s", "eps_accuracy_frac",
    "energy_J", "energy_total_J", "latency_s", "accuracy_frac", "inaccuracy_frac", "pareto_flag",
)


@dataclass
class ResultTable:
    columns: tuple[str, ...]
    rows: list[dict[str, Any]] = field(default_factory=list)

    def add(self, **values):
        missing = set(self.columns) - set(values)
        extra = set(values) - set(self.columns)
        if missing or extra:
            raise ValueError(f"row mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        self.rows.append(values)

    def sort(self, *keys: str):
        self.rows.sort(key=lambda r: tuple(_sort_key(r[k]) for k in keys))

    def __len__(self):
        return len(self.rows)


def _sort_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def parse_value(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _json_value(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return parse_value(format_value(v)) if math.isfinite(v) else format_value(v)
    return v


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(row[c]) for c in table.columns])
    return buf.getvalue()


def to_json(table: ResultTable) -> str:
    payload = {
        "columns": list(table.columns),
        "rows": [{c: _json_value(row[c]) for c in table.columns} for row in table.rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def from_csv(text: str) -> ResultTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    table = ResultTable(tuple(header))
    for rec in reader:
        table.rows.append({c: parse_value(v) for c, v in zip(header, rec)})
    return table


def from_json(text: str) -> ResultTable:
    payload = json.loads(text)
    table = ResultTable(tuple(payload["columns"]))
    for row in payload["rows"]:
        table.rows.append({c: (parse_value(v) if isinstance(v, str) and v in ("inf", "-inf", "nan") else v)
                           for c, v in row.items()})
    return table


def render(table: ResultTable, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise InputError(f"unknown output format {fmt!r}")


def emit_results(table: ResultTable, fmt: str = "csv", path: str | os.PathLike | None = None) -> str:
    """Render ``table`` and write it to ``path`` (if given).  Returns the text.

    An empty table is an error and leaves no file behind.
    """
    if not table.rows:
        raise InputError("refusing to emit an empty result table")
    text = render(table, fmt)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def mark_pareto(rows: Sequence[dict], objective_col: str, group_col: str | None = None):
    """Set ``pareto_flag`` on rows non-dominated in (objective, inaccuracy)."""
    from .optimizer import pareto_filter

    groups: dict[Any, list[dict]] = {}
    for r in rows:
        groups.setdefault(r[group_col] if group_col else None, []).append(r)
    for members in groups.values():
        keep = set(pareto_filter([(r[objective_col], r["inaccuracy_frac"]) for r in members]))
        for i, r in enumerate(members):
            r["pareto_flag"] = int(i in keep)
