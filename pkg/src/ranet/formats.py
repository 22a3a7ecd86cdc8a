"""Text formats: edge lists, degree histograms, choice traces.

All writers end files with a newline and produce byte-identical output for
identical inputs.
"""
from __future__ import annotations

import csv
import io
import os
from typing import TextIO

import numpy as np

from .core import ChoiceTrace, DegreeHistogram, RanState

_CHUNK = 1 << 18


def _open(path: str | os.PathLike) -> TextIO:
    return open(path, "w", newline="\n", encoding="ascii")


def write_edge_list(state: RanState, path: str | os.PathLike) -> None:
    """One ``u v`` pair per line, hull edges first, then three per step."""
    edges = state.edges()
    with _open(path) as fh:
        for lo in range(0, edges.shape[0], _CHUNK):
            block = edges[lo : lo + _CHUNK]
            fh.write("\n".join(f"{u} {v}" for u, v in block.tolist()))
            fh.write("\n")


def read_edge_list(path: str | os.PathLike) -> np.ndarray:
    data = np.loadtxt(path, dtype=np.int64, ndmin=2)
    return data.reshape(-1, 2)


def histogram_csv(hist: DegreeHistogram) -> str:
    buf = io.StringIO()
    buf.write("k,count\n")
    for k, c in hist.as_dict().items():
        buf.write(f"{k},{c}\n")
    return buf.getvalue()


def write_histogram(hist: DegreeHistogram, path: str | os.PathLike) -> None:
    with _open(path) as fh:
        fh.write(histogram_csv(hist))


def read_histogram(path: str | os.PathLike, t: int = -1) -> DegreeHistogram:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["k", "count"]:
            raise ValueError(f"{path}: expected header 'k,count'")
        counts = {int(row["k"]): int(row["count"]) for row in reader}
    return DegreeHistogram(counts, t)


def write_trace(trace: ChoiceTrace, path: str | os.PathLike) -> None:
    with _open(path) as fh:
        for lo in range(0, len(trace), _CHUNK):
            fh.write("".join(f"{x}\n" for x in trace.indices[lo : lo + _CHUNK].tolist()))


def read_trace(path: str | os.PathLike) -> ChoiceTrace:
    with open(path) as fh:
        values = [int(line) for line in fh if line.strip()]
    return ChoiceTrace(np.array(values, dtype=np.int64))
