"""Point files, scheme files and CSV reports."""

from __future__ import annotations

import csv
import datetime as _dt
import io as _io
import json
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import __version__
from .pointset import PointSet, Region


def _fmt(v: float) -> str:
    return "%.17g" % v


def format_points(p: PointSet) -> str:
    """Header ``dim N; region ...`` then one point per line, labels after ``|``."""
    out = [f"dim {p.dim}; {p.region.header()}"]
    for k, x in enumerate(p.points):
        line = " ".join(_fmt(v) for v in x)
        if p.labels is not None:
            line += " | " + " ".join(str(int(v)) for v in p.labels[k])
        out.append(line)
    return "\n".join(out) + "\n"


def write_points(p: PointSet, path: str | Path) -> None:
    Path(path).write_text(format_points(p))


def parse_points(text: str, meta: str = "") -> PointSet:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty point file")
    head = [h.strip() for h in lines[0].split(";")]
    if len(head) != 2 or not head[0].startswith("dim ") or not head[1].startswith("region "):
        raise ValueError(f"bad header {lines[0]!r}")
    dim = int(head[0].split()[1])
    reg = head[1].split()[1:]
    if reg[0] == "ball" and len(reg) == 2:
        region = Region.ball(float(reg[1]))
    elif reg[0] == "box" and len(reg) == 1 + 2 * dim:
        vals = [float(v) for v in reg[1:]]
        region = Region.box(vals[:dim], vals[dim:])
    else:
        raise ValueError(f"bad region {head[1]!r}")
    pts, labs = [], []
    for ln in lines[1:]:
        coords, _, lab = ln.partition("|")
        xs = [float(v) for v in coords.split()]
        if len(xs) != dim:
            raise ValueError(f"expected {dim} coordinates in {ln!r}")
        pts.append(xs)
        if lab.strip():
            labs.append([int(v) for v in lab.split()])
    if labs and len(labs) != len(pts):
        raise ValueError("labels present on some lines only")
    arr = np.array(pts, dtype=float).reshape(-1, dim)
    return PointSet(dim, arr, region, np.array(labs, dtype=np.int64) if labs else None, None, meta)


def read_points(path: str | Path) -> PointSet:
    return parse_points(Path(path).read_text(), meta=f"read from {path}")


def header_lines(config: dict, reproducible: bool = False) -> list[str]:
    lines = [f"# aperiodica {__version__}", "# config: " + json.dumps(config, sort_keys=True)]
    if not reproducible:
        lines.append("# generated: " + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    return lines


def format_csv(columns: Sequence[str], rows: Iterable[Sequence], config: dict, reproducible: bool = False) -> str:
    buf = _io.StringIO()
    for ln in header_lines(config, reproducible):
        buf.write(ln + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return _fmt(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path: str | Path | TextIO, columns, rows, config: dict, reproducible: bool = False) -> None:
    text = format_csv(columns, rows, config, reproducible)
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text)


def csv_body(text: str) -> str:
    """The CSV without its comment header."""
    return "".join(ln for ln in text.splitlines(keepends=True) if not ln.startswith("#"))
