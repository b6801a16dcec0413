"""CSV formats for traces, labelled datasets and residuals.

Numbers are written with 9 significant digits and a dot decimal separator.
A trace file may open with ``# key=value`` comment lines carrying the
generation settings.  A dataset file concatenates labelled traces; a new
trace starts wherever time stops increasing.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ParseError
from .mb import ResidualTrace
from .model import Label, Trace

TRACE_HEADER = ["t", "v0", "v1", "v2", "s1"]
RESIDUAL_HEADER = ["t", "r1", "r2", "valid2", "active1", "active2"]


def fmt(x: float) -> str:
    return f"{x:.9g}"


def traces_to_csv(traces: Sequence[Trace], meta: bool = True) -> str:
    labelled = any(tr.label is not None for tr in traces)
    if labelled and not all(tr.label is not None for tr in traces):
        raise ConfigError("either every trace or none carries a label")
    buf = io.StringIO()
    if meta and len(traces) == 1:
        for key, value in sorted(traces[0].meta.items()):
            buf.write(f"# {key}={value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER + (["label"] if labelled else []))
    for tr in traces:
        for i in range(len(tr)):
            row = [fmt(tr.t[i]), fmt(tr.v0[i]), fmt(tr.v1[i]), fmt(tr.v2[i]), str(int(tr.s1[i]))]
            if labelled:
                row.append(tr.label.value)
            w.writerow(row)
    return buf.getvalue()


def traces_from_csv(text: str) -> list[Trace]:
    lines = text.splitlines()
    meta = {}
    while lines and lines[0].startswith("#"):
        key, sep, value = lines.pop(0)[1:].strip().partition("=")
        if sep:
            meta[key.strip()] = value.strip()
    if not lines:
        raise ParseError("trace file has no header")
    reader = csv.reader(lines)
    header = next(reader)
    labelled = header == TRACE_HEADER + ["label"]
    if header != TRACE_HEADER and not labelled:
        raise ParseError(f"unexpected header {','.join(header)!r}")
    groups: list[list[list[str]]] = []
    last_t = None
    for n, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"row {n}: expected {len(header)} fields")
        try:
            t = float(row[0])
        except ValueError:
            raise ParseError(f"row {n}: bad time {row[0]!r}") from None
        if last_t is None or t <= last_t or (labelled and row[5] != groups[-1][-1][5]):
            groups.append([])
        groups[-1].append(row)
        last_t = t
    if not groups:
        raise ParseError("trace file has no samples")
    out = []
    for rows in groups:
        try:
            cols = [np.array([float(r[j]) for r in rows]) for j in range(4)]
            s1 = np.array([int(r[4]) for r in rows])
            label = Label(rows[0][5]) if labelled else None
            out.append(Trace(*cols, s1, label=label, meta=meta if len(groups) == 1 else {}))
        except (ValueError, ConfigError) as exc:
            raise ParseError(f"bad trace data: {exc}") from None
    return out


def read_traces(path: str | Path) -> list[Trace]:
    return traces_from_csv(Path(path).read_text())


def write_traces(traces: Sequence[Trace], path: str | Path) -> None:
    Path(path).write_text(traces_to_csv(traces))


def residuals_to_csv(res: ResidualTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESIDUAL_HEADER)
    for i in range(len(res)):
        w.writerow([fmt(res.t[i]), fmt(res.r1[i]), fmt(res.r2[i]) if res.valid2[i] else "nan",
                    int(res.valid2[i]), int(res.active1[i]), int(res.active2[i])])
    return buf.getvalue()


def residuals_from_csv(text: str) -> ResidualTrace:
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header != RESIDUAL_HEADER:
        raise ParseError(f"unexpected residual header {header!r}")
    rows = [r for r in reader if r]
    try:
        cols = list(zip(*rows)) if rows else [()] * 6
        return ResidualTrace(
            t=np.array(cols[0], dtype=float), r1=np.array(cols[1], dtype=float),
            r2=np.array(cols[2], dtype=float), valid2=np.array(cols[3], dtype=int).astype(bool),
            active1=np.array(cols[4], dtype=int).astype(bool),
            active2=np.array(cols[5], dtype=int).astype(bool))
    except ValueError as exc:
        raise ParseError(f"bad residual data: {exc}") from None


def csv_rows(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
