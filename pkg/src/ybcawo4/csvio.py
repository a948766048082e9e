"""CSV readers/writers for every interchange format the tools emit.

All floats are written with repr-stable formatting so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .spectra import Spectrum, SweepMap


def _fmt(value) -> str:
    return f"{float(value):.12g}"


def write_rows(path, header, rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                             for cell in row])


def write_spectrum(path, spectrum: Spectrum) -> None:
    write_rows(path, ["detuning_GHz", "absorption"],
               zip(spectrum.detuning_ghz, spectrum.absorption))


def _field_label(value_mt: float) -> str:
    return f"B_{value_mt:g}mT"


def write_sweep_map(path, sweep: SweepMap) -> None:
    header = ["detuning_GHz"] + [_field_label(b) for b in sweep.field_values_mt]
    rows = []
    for k, detuning in enumerate(sweep.detuning_ghz):
        rows.append([detuning] + list(sweep.absorption[:, k]))
    write_rows(path, header, rows)


def write_sweep_long(path, field_values, detuning_ghz, absorption) -> None:
    """Long-form sweep table (field_mT, detuning_GHz, absorption) rows."""
    rows = []
    for k, b in enumerate(field_values):
        for j, d in enumerate(detuning_ghz):
            rows.append([b, d, absorption[k, j]])
    write_rows(path, ["field_mT", "detuning_GHz", "absorption"], rows)


def write_rosette(path, rosette) -> None:
    rows = []
    for angle, resonances in rosette:
        for res in resonances:
            rows.append([angle, res.field_mt,
                         f"{res.pair[0]}-{res.pair[1]}", res.weight])
    write_rows(path, ["angle_deg", "field_mT", "pair", "weight"], rows)


SCHEMAS = {
    "spectrum": {"columns": ("detuning_GHz", "absorption"), "axis": "detuning_GHz"},
    "decay": {"columns": ("tau_s", "intensity"), "axis": "tau_s"},
    "recovery": {"columns": ("delay_s", "n1g", "n23g", "n4g"), "axis": "delay_s"},
    "sweep": {"columns": ("field_mT", "detuning_GHz", "absorption"), "axis": None},
}


def read_measurement_csv(path, schema: str) -> dict[str, np.ndarray]:
    """Validated numeric dataset for one of the documented schemas.

    The header must contain the schema's columns (extras are tolerated with
    a warning); the primary axis must increase strictly.  For the long-form
    sweep schema the detuning must increase within each field block.
    """
    if schema not in SCHEMAS:
        raise ValidationError(f"unknown schema {schema!r}; "
                              f"choose from {sorted(SCHEMAS)}")
    spec = SCHEMAS[schema]
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in spec["columns"] if c not in header]
        if missing:
            raise ValidationError(f"{path}: missing column(s) {missing}")
        extra = [c for c in header if c not in spec["columns"]]
        if extra:
            warnings.warn(f"{path}: ignoring unknown column(s) {extra}",
                          stacklevel=2)
        indices = {c: header.index(c) for c in spec["columns"]}
        data = {c: [] for c in spec["columns"]}
        for row_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            for column, idx in indices.items():
                try:
                    data[column].append(float(row[idx]))
                except (ValueError, IndexError):
                    raise ValidationError(
                        f"{path}:{row_number}: non-numeric value in "
                        f"column {column!r}") from None
    arrays = {c: np.asarray(v, dtype=float) for c, v in data.items()}
    axis = spec["axis"]
    if axis is not None:
        values = arrays[axis]
        if values.size >= 2 and np.any(np.diff(values) <= 0):
            raise ValidationError(f"{path}: non-monotonic axis {axis!r}")
    if schema == "sweep" and arrays["field_mT"].size:
        if np.any(np.diff(arrays["field_mT"]) < 0):
            raise ValidationError(f"{path}: non-monotonic axis 'field_mT'")
        blocks = np.flatnonzero(np.diff(arrays["field_mT"]) != 0)
        starts = np.concatenate([[0], blocks + 1])
        ends = np.concatenate([blocks + 1, [arrays["field_mT"].size]])
        for lo, hi in zip(starts, ends):
            segment = arrays["detuning_GHz"][lo:hi]
            if segment.size >= 2 and np.any(np.diff(segment) <= 0):
                raise ValidationError(
                    f"{path}: non-monotonic axis 'detuning_GHz' within a "
                    "field block")
    return arrays
