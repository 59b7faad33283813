"""
Reading polar-motion records and writing results.

Records are delimited text (whitespace or commas) with ``#`` comment
lines. A column spec such as ``"epoch,x,y"`` names the leading columns;
``skip`` ignores a column and ``mjd`` may stand in for ``epoch`` (it is
converted to Julian years). A first row naming the columns (``epoch,x,y``)
is read as a header. The series comes back as x + iy in
milliarcseconds with time in years.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence, TextIO

import numpy as np

from .sampling import ComplexSeries

__all__ = [
    "IngestError",
    "EopTable",
    "parse_eop",
    "ingest_eop",
    "series_to_csv",
    "write_results",
    "read_json",
    "load_polar_snapshot",
    "SPACING_TOL",
]

SPACING_TOL = 1e-6
_UNITS = {"mas": 1.0, "arcsec": 1000.0}
_LABELS = {"epoch", "mjd", "x", "y", "skip"}


class IngestError(ValueError):
    """Malformed or irregular input; the message names the offending line or gap."""


@dataclass
class EopTable:
    epochs: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lines: np.ndarray
    rejected: list[tuple[int, str, str]] = field(default_factory=list)
    n_data_rows: int = 0


def _parse_columns(columns: str | Sequence[str]) -> list[str]:
    labels = [c.strip().lower() for c in (columns.split(",") if isinstance(columns, str) else columns)]
    unknown = set(labels) - _LABELS
    if unknown:
        raise ValueError(f"unknown column labels {sorted(unknown)}; use epoch|mjd, x, y, skip")
    time_cols = [c for c in labels if c in ("epoch", "mjd")]
    if len(time_cols) != 1 or labels.count("x") != 1 or labels.count("y") != 1:
        raise ValueError("column spec needs exactly one of epoch/mjd, one x and one y")
    return labels


def _split(line: str) -> list[str]:
    if "," in line:
        return [f.strip() for f in line.split(",")]
    return line.split()


def _is_header(fields: list[str]) -> bool:
    names = {f.strip().lower() for f in fields}
    return {"x", "y"} <= names and bool(names & {"epoch", "mjd", "t"})


def parse_eop(
    stream: TextIO | Iterable[str],
    columns: str | Sequence[str] = "epoch,x,y",
    unit: Literal["arcsec", "mas"] = "mas",
    on_bad_row: Literal["raise", "skip"] = "raise",
) -> EopTable:
    """Parse rows without checking the spacing.

    With ``on_bad_row="skip"`` unparseable rows are recorded in
    ``rejected`` as (line number, text, reason) so that the kept rows plus
    the rejected ones always account for every data row.
    """
    if unit not in _UNITS:
        raise ValueError(f"unit must be arcsec or mas, got {unit!r}")
    labels = _parse_columns(columns)
    scale = _UNITS[unit]
    t_idx = labels.index("mjd") if "mjd" in labels else labels.index("epoch")
    from_mjd = "mjd" in labels
    ix, iy = labels.index("x"), labels.index("y")
    need = max(t_idx, ix, iy) + 1
    ep, xs, ys, ln, bad = [], [], [], [], []
    n_rows = 0
    seen_data = False
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = _split(text)
        if not seen_data and _is_header(fields):
            # a leading header row (as written by series_to_csv) is not data
            seen_data = True
            continue
        seen_data = True
        n_rows += 1
        try:
            if len(fields) < need:
                raise ValueError(f"expected at least {need} fields, found {len(fields)}")
            t, a, b = float(fields[t_idx]), float(fields[ix]), float(fields[iy])
            if not (math.isfinite(t) and math.isfinite(a) and math.isfinite(b)):
                raise ValueError("non-finite value")
        except ValueError as exc:
            if on_bad_row == "raise":
                raise IngestError(f"line {lineno}: cannot parse {text!r} ({exc})") from None
            bad.append((lineno, text, str(exc)))
            continue
        if from_mjd:
            t = 2000.0 + (t - 51544.5) / 365.25
        ep.append(t)
        xs.append(a * scale)
        ys.append(b * scale)
        ln.append(lineno)
    return EopTable(np.array(ep), np.array(xs), np.array(ys), np.array(ln, dtype=int), bad, n_rows)


def ingest_eop(
    stream: TextIO | Iterable[str],
    columns: str | Sequence[str] = "epoch,x,y",
    unit: Literal["arcsec", "mas"] = "mas",
    tol: float = SPACING_TOL,
) -> ComplexSeries:
    """Parse a regularly sampled record into a ComplexSeries of x + iy (mas).

    The sampling interval is the mean gap rounded to 1e-9 years, so writing
    a series out and reading it back reproduces the same interval.

    Raises
    ------
    IngestError
        On an unparseable row (with its line number), fewer than two rows,
        non-increasing epochs, or a gap differing from the first gap by more
        than ``tol`` years (naming the first such gap).
    """
    tab = parse_eop(stream, columns, unit, on_bad_row="raise")
    if tab.epochs.size < 2:
        raise IngestError("need at least two data rows")
    gaps = np.diff(tab.epochs)
    if np.any(gaps <= 0):
        k = int(np.argmax(gaps <= 0))
        raise IngestError(
            f"epochs not increasing between lines {tab.lines[k]} and {tab.lines[k + 1]} "
            f"({float(tab.epochs[k])!r} -> {float(tab.epochs[k + 1])!r})"
        )
    # the first gap sets the expected spacing, so the report names the first
    # gap that breaks it
    off = np.abs(gaps - gaps[0]) > tol
    if off.any():
        k = int(np.argmax(off))
        raise IngestError(
            f"irregular spacing: gap of {gaps[k]:.9g} years between lines {tab.lines[k]} and "
            f"{tab.lines[k + 1]} (epochs {float(tab.epochs[k])!r}, {float(tab.epochs[k + 1])!r}); "
            f"expected {float(gaps[0]):.9g}"
        )
    delta = round(float(np.mean(gaps)), 9)
    return ComplexSeries(tab.x + 1j * tab.y, delta, float(tab.epochs[0]))


def series_to_csv(series: ComplexSeries) -> str:
    """CSV text with header ``epoch,x,y``; values printed for exact round trip."""
    buf = io.StringIO()
    buf.write("epoch,x,y\n")
    for t, v in zip(series.times, series.values):
        buf.write(f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}\n")
    return buf.getvalue()


def to_jsonable(obj: Any) -> Any:
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: Any) -> str:
    if isinstance(rows, ComplexSeries):
        return series_to_csv(rows)
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    buf = io.StringIO()
    if isinstance(rows[0], dict):
        header = list(rows[0].keys())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[h]) for h in header])
    else:
        w = csv.writer(buf, lineterminator="\n")
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_results(result: Any, path: str | os.PathLike) -> None:
    """Write ``result`` atomically: JSON for ``.json`` paths, CSV otherwise.

    Objects with ``to_dict`` (fit and bootstrap results) become JSON; a
    ComplexSeries or a list of dict rows becomes CSV with the dict key
    order as header. Floats use the shortest repr that parses back to the
    same double.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        text = json.dumps(to_jsonable(result), indent=2, allow_nan=True) + "\n"
    else:
        text = _csv_text(result)
    atomic_write(path, text)


def read_json(path: str | os.PathLike) -> Any:
    with open(path) as fh:
        return json.load(fh)


def load_polar_snapshot() -> ComplexSeries:
    """The bundled polar-motion record (see the header of the CSV for provenance)."""
    ref = resources.files("ellipticalou") / "data" / "polar_motion.csv"
    if not ref.is_file():
        raise FileNotFoundError("bundled polar-motion snapshot is missing")
    with ref.open("r") as fh:
        return ingest_eop(fh, "epoch,x,y", "mas")
