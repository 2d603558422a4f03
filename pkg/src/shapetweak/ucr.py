"""Delimited dataset files: label-first rows, comma or tab separated.

Labels are kept as exact tokens so "1"/"2", "-1"/"1", and named classes all
work unmodified.  Values parse to float64 and serialize with shortest
round-trip repr, so parse -> write -> parse is value-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetParseError
from .persistence import atomic_write_text

__all__ = ["DatasetFile", "parse_ucr", "load_dataset", "write_dataset", "write_series_plot_data"]


@dataclass
class DatasetFile:
    records: list[tuple[str, np.ndarray]]
    path: str
    delimiter: str

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.records]

    @property
    def n_rows(self) -> int:
        return len(self.records)

    @property
    def series_length(self) -> int | None:
        lengths = {values.size for _, values in self.records}
        return lengths.pop() if len(lengths) == 1 else None


def _detect_delimiter(line: str, path) -> str:
    if "\t" in line:
        return "\t"
    if "," in line:
        return ","
    raise DatasetParseError(
        "could not detect a comma or tab delimiter; pass one explicitly", path=path, line=1
    )


def parse_ucr(path, delimiter: str | None = None, strict_length: bool = False) -> DatasetFile:
    """Parse a label-first delimited file into (label, values) records.

    Rows may have differing lengths unless ``strict_length`` is set (the
    nearest-neighbor baseline needs equal lengths).  Any empty row or
    non-numeric value is an error carrying its 1-based line number.
    """
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines:
        raise DatasetParseError("file contains no rows", path=path)

    if delimiter is None:
        delimiter = _detect_delimiter(lines[0], path)

    records: list[tuple[str, np.ndarray]] = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            raise DatasetParseError("empty row", path=path, line=line_number)
        tokens = [token.strip() for token in line.split(delimiter)]
        if len(tokens) < 2:
            raise DatasetParseError(
                f"row has no values after the label (delimiter {delimiter!r})",
                path=path, line=line_number,
            )
        label = tokens[0]
        try:
            values = np.array([float(token) for token in tokens[1:]], dtype=np.float64)
        except ValueError as exc:
            raise DatasetParseError(f"non-numeric value: {exc}", path=path, line=line_number)
        if not np.all(np.isfinite(values)):
            raise DatasetParseError("non-finite value", path=path, line=line_number)
        records.append((label, values))

    if strict_length:
        lengths = {values.size for _, values in records}
        if len(lengths) > 1:
            raise DatasetParseError(
                f"strict-length mode: rows have differing lengths {sorted(lengths)}", path=path
            )
    return DatasetFile(records=records, path=str(path), delimiter=delimiter)


def _znormalize(values: np.ndarray) -> np.ndarray:
    std = values.std()
    if std == 0.0:
        return values - values.mean()
    return (values - values.mean()) / std


def load_dataset(path, delimiter: str | None = None, normalize: bool = False,
                 strict_length: bool = False) -> DatasetFile:
    """Parse a dataset file, optionally z-normalizing each series at load time.

    Normalization never happens inside distance computations; it is purely a
    preprocessing choice applied here.
    """
    data = parse_ucr(path, delimiter=delimiter, strict_length=strict_length)
    if normalize:
        data.records = [(label, _znormalize(values)) for label, values in data.records]
    return data


def write_dataset(records, path, delimiter: str = ",") -> None:
    lines = [
        delimiter.join([str(label)] + [repr(float(v)) for v in np.asarray(values)])
        for label, values in records
    ]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_series_plot_data(values, path) -> None:
    """Two-column plot data: time index and value, one sample per line."""
    lines = [f"{i}\t{repr(float(v))}" for i, v in enumerate(np.asarray(values))]
    atomic_write_text(path, "\n".join(lines) + "\n")
