"""CSV / JSON emission for report rows and sweep tables."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys

from rmtcap.errors import RmtcapError

COLUMNS = ("scenario", "J_m", "K_m", "beta", "method", "trial", "capacity", "wall_time_s",
           "seed", "neg_density_frac", "fit_residual")


class ReportError(RmtcapError, OSError):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def to_records(rows) -> list[dict]:
    return [r if isinstance(r, dict) else dataclasses.asdict(r) for r in rows]


def render(rows, fmt: str = "csv", columns=COLUMNS) -> str:
    records = to_records(rows)
    if fmt == "json":
        return json.dumps([{c: rec.get(c) for c in columns} for rec in records], indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def emit_report(rows, fmt: str = "csv", path=None, columns=COLUMNS) -> None:
    """Write rows to ``path`` (stdout when ``path`` is None or '-')."""
    text = render(rows, fmt, columns)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


GNUPLOT_TIMING = """\
set datafile separator ','
set logscale xy
set key top left
set xlabel 'J_m'
set ylabel 'seconds per trial'
plot '{csv}' skip 1 using 1:(strcol(2) eq 'mpm' ? $5 : 1/0) with linespoints title 'MPM', \\
     '{csv}' skip 1 using 1:(strcol(2) eq 'cdm' ? $5 : 1/0) with linespoints title 'CDM'
"""
