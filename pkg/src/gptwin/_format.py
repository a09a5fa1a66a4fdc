"""Deterministic numeric text output shared by every artifact writer."""

import csv

import numpy as np


def fmt(x) -> str:
    """Shortest round-trip text for a number; empty string for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path):
    """Return ``(header, rows)`` with rows left as strings."""
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        return header, list(r)
