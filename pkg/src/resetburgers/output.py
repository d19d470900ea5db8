"""CSV and manifest writing shared by the CLI and the experiment drivers.

All floating-point output uses round-trip-exact decimal formatting (17
significant digits), CSVs follow RFC-4180 quoting, and every job directory
gets a JSON manifest with content hashes so a verify pass can detect
tampering.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from pathlib import Path

__all__ = ["fmt", "write_table_csv", "write_manifest", "verify_manifest"]

MANIFEST_NAME = "manifest.json"


def fmt(v) -> str:
    """Round-trip-exact decimal rendering of one CSV cell."""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def write_table_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, job: dict, outputs: list, wall_time: float) -> Path:
    """JSON manifest: job echo, seed, version, hashed file list, wall time."""
    from . import __version__

    out_dir = Path(out_dir)
    files = []
    for p in sorted(Path(f) for f in outputs):
        files.append(
            {
                "path": p.name,
                "sha256": _sha256(p),
                "bytes": p.stat().st_size,
            }
        )
    doc = {
        "tool": "resetburgers",
        "version": __version__,
        "created_unix": time.time(),
        "wall_time_s": wall_time,
        "job": job,
        "files": files,
    }
    path = out_dir / MANIFEST_NAME
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def verify_manifest(out_dir) -> tuple[bool, list]:
    """Re-hash the files listed in the manifest; returns (ok, mismatches)."""
    out_dir = Path(out_dir)
    with open(out_dir / MANIFEST_NAME) as fh:
        doc = json.load(fh)
    bad = []
    for entry in doc.get("files", []):
        p = out_dir / entry["path"]
        if not p.exists() or _sha256(p) != entry["sha256"]:
            bad.append(entry["path"])
    return (not bad), bad
