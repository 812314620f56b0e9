"""CSV emission and parsing for spectra and phase sweeps.

All files are UTF-8 with LF line endings.  Numbers are written with 17
significant digits so that reading them back recovers the float exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

FMT = "{:.17g}"


def _fmt(x: float) -> str:
    return FMT.format(float(x))


def write_spectrum_csv(path, omega, values, gamma: float = 1.0):
    """Two-column CSV ``omega_over_gamma,value``.

    ``gamma`` rescales the frequency column only; the header then reads
    ``omega`` instead of ``omega_over_gamma``.
    """
    header = "omega_over_gamma" if gamma == 1.0 else "omega"
    lines = [f"{header},value"]
    lines += [f"{_fmt(w * gamma)},{_fmt(v)}" for w, v in zip(omega, values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][1] != "value":
        raise ValueError(f"{path}: missing 'omega_over_gamma,value' header")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return data[:, 0], data[:, 1]


def write_sweep_csv(path, phis, omega, matrix, gamma: float = 1.0):
    """Matrix CSV: first row is the frequency axis, first column is ``phi/pi``."""
    matrix = np.asarray(matrix)
    if matrix.shape != (len(phis), len(omega)):
        raise ValueError(f"matrix shape {matrix.shape} does not match axes ({len(phis)}, {len(omega)})")
    lines = [",".join(["phi_over_pi"] + [_fmt(w * gamma) for w in omega])]
    for phi, row in zip(phis, matrix):
        lines.append(",".join([_fmt(phi / np.pi)] + [_fmt(v) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_sweep_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns ``(phi_over_pi, omega, matrix)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "phi_over_pi":
        raise ValueError(f"{path}: missing 'phi_over_pi' header")
    omega = np.array([float(x) for x in rows[0][1:]])
    body = np.array([[float(x) for x in r] for r in rows[1:]])
    return body[:, 0], omega, body[:, 1:]
