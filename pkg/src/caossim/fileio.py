"""Portable, diffable file formats: CSV matrices and 16-bit binary PGM.

CSV is the authoritative linear-value store (full float64 round-trip via
repr-style formatting).  PGM is a display rendering normalized to the
image maximum, with an optional log10 scaling for HDR viewing; it never
replaces the CSV data.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .waveform import SampledSignal

__all__ = [
    "write_matrix_csv",
    "read_matrix_csv",
    "write_pgm16",
    "read_pgm16",
    "log_display",
    "write_streams_csv",
]

PGM_MAXVAL = 65535


def write_matrix_csv(path: str | Path, matrix: np.ndarray) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open(path, "w", encoding="ascii") as fh:
        for row in m:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    return np.array(rows, dtype=np.float64)


def write_pgm16(path: str | Path, matrix: np.ndarray) -> None:
    """Binary (P5) 16-bit big-endian PGM, normalized to the matrix maximum."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("PGM export needs a 2-D matrix")
    peak = m.max()
    scaled = m / peak * PGM_MAXVAL if peak > 0 else np.zeros_like(m)
    data = np.clip(np.round(scaled), 0, PGM_MAXVAL).astype(">u2")
    header = f"P5\n{m.shape[1]} {m.shape[0]}\n{PGM_MAXVAL}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_pgm16(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM file")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != PGM_MAXVAL:
        raise ValueError(f"expected 16-bit PGM (maxval {PGM_MAXVAL}), got {maxval}")
    pos += 1  # single whitespace after maxval
    data = np.frombuffer(blob, dtype=">u2", count=width * height, offset=pos)
    return data.reshape(height, width).astype(np.float64)


def log_display(matrix: np.ndarray, floor_decades: float = 8.0) -> np.ndarray:
    """log10 rendering of a nonnegative image, clipped floor_decades below peak.

    Output spans [0, 1]; the stored linear data is untouched.
    """
    m = np.asarray(matrix, dtype=np.float64)
    peak = m.max()
    if peak <= 0:
        return np.zeros_like(m)
    floor = peak * 10.0**-floor_decades
    logd = np.log10(np.clip(m, floor, None) / floor)
    return logd / np.log10(peak / floor)


def write_streams_csv(path: str | Path, streams: Sequence[SampledSignal]) -> None:
    """Slot streams side by side, one column per slot."""
    if not streams:
        raise ValueError("no streams to write")
    cols = np.column_stack([s.samples for s in streams])
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(f"slot_{i}" for i in range(cols.shape[1])) + "\n")
        for row in cols:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
