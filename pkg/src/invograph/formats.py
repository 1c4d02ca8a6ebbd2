"""Text formats for matrices, class dumps, path certificates, and CSV census rows.

Matrix text format::

    p e c0 ... ce        field header
    rows cols
    a11 a12 ...          one line per row, entries as integers in range(q)

A class dump is a field header followed by matrix records separated by blank
lines. A certificate is a sequence of matrix records preceded by a ``#``
stamp line recording whether it validated.
"""
from __future__ import annotations

import csv
import io

import numpy as np

from .errors import FormatError
from .gf import Field
from .graph import DistanceCensus, PathCertificate


def format_matrix(F: Field, m) -> str:
    m = np.asarray(m, dtype=np.int64)
    if m.ndim != 2:
        raise FormatError("expected a 2-d matrix")
    lines = [F.header(), f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(str(int(v)) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> list:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def _parse_records(lines: list, max_q=None) -> tuple:
    F = None
    mats = []
    i = 0
    while i < len(lines):
        header = Field.from_header(lines[i], max_q=max_q)
        if F is None:
            F = header
        elif header != F:
            raise FormatError("records use different fields")
        try:
            rows, cols = (int(v) for v in lines[i + 1].split())
            body = [[int(v) for v in ln.split()] for ln in lines[i + 2 : i + 2 + rows]]
        except (IndexError, ValueError) as exc:
            raise FormatError(f"malformed matrix record near line {i + 1}") from exc
        if len(body) != rows or any(len(r) != cols for r in body):
            raise FormatError("matrix record has the wrong shape")
        m = np.array(body, dtype=np.int64).reshape(rows, cols)
        if m.size and (m.min() < 0 or m.max() >= F.q):
            raise FormatError(f"entries must lie in range({F.q})")
        mats.append(m)
        i += 2 + rows
    return F, mats


def parse_matrix(text: str, max_q=None) -> tuple:
    """Inverse of format_matrix: returns (field, matrix)."""
    F, mats = _parse_records(_content_lines(text), max_q)
    if len(mats) != 1:
        raise FormatError(f"expected one matrix, found {len(mats)}")
    return F, mats[0]


def format_class_dump(F: Field, mats) -> str:
    parts = [F.header() + "\n"]
    parts += [format_matrix(F, m) for m in mats]
    return "\n".join(parts)


def parse_class_dump(text: str, max_q=None) -> tuple:
    lines = _content_lines(text)
    if not lines:
        raise FormatError("empty class dump")
    # a leading bare header precedes the records
    if len(lines) > 1 and len(lines[1].split()) != 2:
        lines = lines[1:]
    elif len(lines) == 1:
        return Field.from_header(lines[0], max_q=max_q), []
    return _parse_records(lines, max_q)


def format_certificate(cert: PathCertificate) -> str:
    ok = not cert.problems()
    stamp = f"# certificate {'valid' if ok else 'INVALID'} length={cert.length} k={cert.k}"
    if cert.note:
        stamp += f"\n# {cert.note}"
    return stamp + "\n" + "\n".join(format_matrix(cert.field, m) for m in cert.members)


def parse_certificate(text: str, max_q=None) -> PathCertificate:
    k = None
    for ln in text.splitlines():
        if ln.startswith("# certificate"):
            for tok in ln.split():
                if tok.startswith("k=") and tok[2:] != "None":
                    k = int(tok[2:])
    F, mats = _parse_records(_content_lines(text), max_q)
    if F is None:
        raise FormatError("certificate has no members")
    return PathCertificate(F, mats, k)


def census_csv(census: DistanceCensus) -> str:
    """One row per (distance, m, count); m is blank when cells were not computed."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["distance", "m", "count"])
    if census.cells is not None:
        for (d, m), c in sorted(census.cells.items()):
            w.writerow([d, m, c])
    else:
        for d, c in sorted(census.counts.items()):
            w.writerow([d, "", c])
    if census.unreached:
        w.writerow(["inf", "", census.unreached])
    return buf.getvalue()
