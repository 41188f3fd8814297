"""CSV and JSON persistence for trial records."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .harness import TrialRecord, sort_records

COLUMNS = ("policy", "replication", "seed", "regret", "selected_arm")


def _fmt(fmt, path) -> str:
    fmt = fmt or Path(path).suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown record format {fmt!r} for {path}; use csv or json")
    return fmt


def write_records(records, path, fmt: str | None = None) -> None:
    """Write records sorted by (policy, replication). Format defaults to the file suffix."""
    fmt = _fmt(fmt, path)
    rows = sort_records(records)
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh)
                w.writerow(COLUMNS)
                for r in rows:
                    w.writerow([r.policy, r.replication, r.seed, repr(float(r.regret)), r.selected_arm])
            else:
                out = []
                for r in rows:
                    d = {c: getattr(r, c) for c in COLUMNS}
                    d["regret"] = None if r.regret != r.regret else float(r.regret)
                    if r.allocation_summary is not None:
                        d["allocation_summary"] = list(r.allocation_summary)
                    if r.error is not None:
                        d["error"] = r.error
                    out.append(d)
                json.dump(out, fh, indent=1)
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc


def read_records(path, fmt: str | None = None) -> list:
    fmt = _fmt(fmt, path)
    try:
        with open(path, newline="") as fh:
            if fmt == "csv":
                rows = list(csv.DictReader(fh))
            else:
                rows = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read records from {path}: {exc}") from exc
    out = []
    for d in rows:
        reg = d["regret"]
        out.append(TrialRecord(
            str(d["policy"]), int(d["replication"]), int(d["seed"]),
            float("nan") if reg is None else float(reg), int(d["selected_arm"]),
            tuple(d["allocation_summary"]) if d.get("allocation_summary") else None,
            d.get("error") or None,
        ))
    return out
