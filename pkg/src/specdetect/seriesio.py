"""Plain-text series files and '#'-annotated CSV tables.

Series file layout::

    # dt=60
    # units=m/s
    0.12
    -0.40
    ...

or two columns ``time value`` (whitespace or comma separated), in which case
``dt`` is inferred from the time column and must be uniform to 1e-6 relative.
"""

from __future__ import annotations

import csv
import io
import math
import re
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import IngestionError, InvalidInputError
from .model import TimeSeries

SPACING_RTOL = 1e-6
_META = re.compile(r"^\s*([A-Za-z_][\w\-]*)\s*[=:]\s*(.*?)\s*$")
_SPLIT = re.compile(r"[,\s]+")


def _parse_meta(line: str, meta: dict) -> None:
    m = _META.match(line.lstrip("#"))
    if m:
        meta[m.group(1).lower()] = m.group(2)


def load_series(path) -> TimeSeries:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    meta: dict = {}
    rows, lines = [], []
    ncol = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            _parse_meta(line, meta)
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if ncol is None:
            ncol = len(fields)
            if ncol not in (1, 2):
                raise IngestionError(f"{path}:{lineno}: expected 1 or 2 columns, got {ncol}")
        if len(fields) != ncol:
            raise IngestionError(f"{path}:{lineno}: expected {ncol} columns, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise IngestionError(f"{path}:{lineno}: cannot parse {line!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise IngestionError(f"{path}:{lineno}: non-finite value")
        rows.append(vals)
        lines.append(lineno)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    data = np.array(rows)

    header_dt = None
    if "dt" in meta:
        try:
            header_dt = float(meta["dt"].split()[0])
        except (ValueError, IndexError):
            raise IngestionError(f"{path}: cannot parse dt header {meta['dt']!r}") from None
    if ncol == 2:
        t = data[:, 0]
        if t.size < 2:
            raise IngestionError(f"{path}: need at least two rows to infer dt")
        steps = np.diff(t)
        dt = (t[-1] - t[0]) / (t.size - 1)
        bad = np.flatnonzero(np.abs(steps - dt) > SPACING_RTOL * abs(dt))
        if bad.size:
            i = bad[0] + 1
            raise IngestionError(
                f"{path}:{lines[i]}: non-uniform time spacing (step {steps[i - 1]!r}, expected {dt!r})")
        if header_dt is not None and abs(header_dt - dt) > SPACING_RTOL * abs(dt):
            raise IngestionError(f"{path}: header dt={header_dt} disagrees with time column dt={dt}")
        values = data[:, 1]
    else:
        if header_dt is None:
            raise IngestionError(f"{path}: single-column file needs a '# dt=...' header")
        dt = header_dt
        values = data[:, 0]
    try:
        return TimeSeries(values, dt)
    except InvalidInputError as exc:
        raise IngestionError(f"{path}: {exc}") from exc


def write_series(path, series: TimeSeries, units: Optional[str] = None, with_time: bool = True) -> None:
    with open(path, "w") as fh:
        fh.write(f"# dt={series.dt!r}\n")
        if units:
            fh.write(f"# units={units}\n")
        if with_time:
            for t, v in zip(series.times, series.samples):
                fh.write(f"{float(t)!r} {float(v)!r}\n")
        else:
            for v in series.samples:
                fh.write(f"{float(v)!r}\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_table(columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping[str, object] = ()) -> str:
    buf = io.StringIO()
    for k, v in dict(meta).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_table(path, columns, rows, meta=()) -> Path:
    path = Path(path)
    path.write_text(format_table(columns, rows, meta))
    return path


def _convert(s: str):
    if s == "":
        return None
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    return s


def read_table(path) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_table`: (metadata, rows as dicts with numbers parsed)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            _parse_meta(line, meta)
        else:
            body.append(line)
    reader = csv.DictReader(body)
    return meta, [{k: _convert(v) for k, v in row.items()} for row in reader]
