"""Fixed-schema CSV tables with round-trip float precision."""

import csv
import math

import numpy as np

from .errors import SchemaError

CHECKPOINT_COLUMNS = ("t", "grad_norm_x", "grad_norm_xbar", "phi", "e_diss",
                      "energy_residual")
BOUND_COLUMNS = ("T", "alpha", "min_grad_norm_xbar", "t_star", "leading_bound",
                 "finite_T_bound", "satisfied")
SWEEP_COLUMNS = BOUND_COLUMNS + ("step_count", "wall_time_seconds", "error")


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def write_table(path, columns, rows):
    """Write ``rows`` (mappings keyed by column name) in ``columns`` order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])


def write_columns(path, columns, arrays):
    """Write equal-length 1-d arrays as columns."""
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for vals in zip(*arrays):
            writer.writerow(["%.17g" % v for v in vals])


def read_table(path, schemas=(CHECKPOINT_COLUMNS, SWEEP_COLUMNS, BOUND_COLUMNS)):
    """Read a CSV written by this package.

    Returns ``(columns, data)`` where ``data`` maps column name to a list of
    strings. Raises :class:`SchemaError` for empty files or unknown headers.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = tuple(rows[0])
    if header not in schemas:
        raise SchemaError(f"{path}: unrecognised header {header}")
    body = rows[1:]
    if not body:
        raise SchemaError(f"{path}: header only, no data rows")
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise SchemaError(f"{path}:{i}: expected {len(header)} fields")
    data = {c: [r[j] for r in body] for j, c in enumerate(header)}
    return header, data


def float_column(data, name):
    return np.array([float(s) if s else np.nan for s in data[name]])
