"""Readers for the simulator's delimited outputs.

Every reader validates the header and reports malformed content with
its one-based line number.
"""

from __future__ import annotations

import json
import math

import numpy as np

RUN_HEADER = ["t", "m_w", "m_x", "V_w", "mass", "state"]
ENSEMBLE_HEADER = ["t", "m_w", "m_x", "V_w", "mass"]
BANDS_HEADER = ["t", "M_n", "sigma", "r_plus", "r_minus", "bandwidth"]
SWEEP_HEADER = ["alpha", "beta", "pct_bubble", "pct_crash"]


class CsvFormatError(ValueError):
    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


def _read_table(path, expected_header, text_columns=()):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CsvFormatError(path, 1, "empty file")
    header = lines[0].split(",")
    if header != expected_header:
        raise CsvFormatError(path, 1,
                             f"header {lines[0]!r}, expected "
                             f"{','.join(expected_header)!r}")
    columns = {name: [] for name in expected_header}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(expected_header):
            raise CsvFormatError(path, lineno,
                                 f"expected {len(expected_header)} fields, "
                                 f"got {len(parts)}")
        for name, raw in zip(expected_header, parts):
            if name in text_columns:
                columns[name].append(raw)
            else:
                try:
                    columns[name].append(float(raw))
                except ValueError:
                    raise CsvFormatError(path, lineno,
                                         f"bad number {raw!r} in column "
                                         f"{name}") from None
    return {name: (vals if name in text_columns else np.asarray(vals))
            for name, vals in columns.items()}


def read_run(path):
    """A per-run trajectory (t, m_w, m_x, V_w, mass, state)."""
    return _read_table(path, RUN_HEADER, text_columns=("state",))


def read_ensemble(path):
    """The averaged ensemble trajectory."""
    return _read_table(path, ENSEMBLE_HEADER)


def read_trajectory(path):
    """A trajectory CSV of either flavour."""
    try:
        return read_ensemble(path)
    except CsvFormatError:
        return read_run(path)


def read_bands(path):
    return _read_table(path, BANDS_HEADER)


def read_sweep(path):
    return _read_table(path, SWEEP_HEADER)


def read_summary(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def background_from_summary(summary):
    """Rebuild W(t) from the scenario echo in summary.json."""
    doc = summary["config"]["scenario"]["background"]
    kind = doc["kind"]
    if kind == "constant":
        value = float(doc["value"])
        return lambda t: value
    if kind == "sin-exp":
        c0, c1 = float(doc["c0"]), float(doc["c1"])
        omega, rate = float(doc["omega"]), float(doc["rate"])
        return lambda t: c0 + c1 * (math.sin(omega * t)
                                    + 0.5 * math.exp(rate * t))
    if kind == "piecewise":
        points = [(float(a), float(b)) for a, b in doc["points"]]

        def eval_piecewise(t):
            value = points[0][1]
            for tb, wb in points:
                if tb <= t:
                    value = wb
                else:
                    break
            return value

        return eval_piecewise
    raise ValueError(f"summary: unknown background kind {kind!r}")
