"""Report assembly and JSON / CSV emission.

All wall-clock data (timestamp and per-case seconds) lives under the single
top-level ``timing`` key; everything else is a deterministic function of
the configuration and seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from datetime import datetime, timezone

from .. import __version__
from .config import RunConfig
from .suites import SAMPLER, run_suite

CSV_HEADER = ("suite", "case", "residual", "tol", "pass", "seconds")


def _digest(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def build_report(cfg: RunConfig, suites, workers: int | None = None) -> dict:
    workers = workers or cfg.workers
    cases, seconds = [], []
    for name in suites:
        c, s = run_suite(name, cfg, workers)
        cases.extend(c)
        seconds.extend(s)
    entries = []
    for c in cases:
        entries.append({
            "suite": c["suite"],
            "case": c["case"],
            "inputs": c["inputs"],
            "inputs_digest": _digest(c["inputs"]),
            "residual": c["residual"],
            "tol": c["tol"],
            "pass": c["status"] == "pass",
            "status": c["status"],
        })
    failed = sum(e["status"] == "fail" for e in entries)
    skipped = sum(e["status"].startswith("skipped") for e in entries)
    return {
        "tool": "qkz-kit",
        "version": __version__,
        "config_digest": cfg.digest(),
        "sampler": {"generator": SAMPLER, "seed": cfg.seed},
        "suites": list(suites),
        "cases": entries,
        "summary": {"total": len(entries), "passed": len(entries) - failed - skipped,
                    "failed": failed, "skipped": skipped},
        "timing": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "seconds": seconds,
        },
    }


def exit_code(report: dict) -> int:
    return 1 if report["summary"]["failed"] else 0


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for e, sec in zip(report["cases"], report["timing"]["seconds"]):
        res = "" if e["residual"] is None else repr(e["residual"])
        w.writerow([e["suite"], e["case"], res, repr(e["tol"]),
                    e["status"], f"{sec:.6f}"])
    return buf.getvalue()


def emit_report(report: dict, path: str, fmt: str = "json") -> None:
    """Write the report; OSError propagates to the caller."""
    text = to_json(report) if fmt == "json" else to_csv(report)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
