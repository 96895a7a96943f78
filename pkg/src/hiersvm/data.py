"""Delimited-text ingestion and the fixed benchmark feature subsets.

The package ships the classic 150-sample iris table plus two committed subset
specs: 75 rows over (sepal width, petal width) chosen to be linearly separable
by a multiclass machine, and 75 rows over (sepal length, sepal width) chosen
to be non-separable. The subset files record the exact row indices; the
separability flag is certified at load time by actually minimizing the hinge
loss rather than trusted.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .model import TrainingDataset

SEPARABILITY_HINGE_TOL = 1e-6


@dataclass(frozen=True)
class DatasetSchema:
    """Column layout of a delimited text file."""

    feature_columns: tuple[str | int, ...]
    label_column: str | int
    label_map: Mapping[str, int] | None = None  # None -> labels parsed as integers
    delimiter: str | None = None  # None -> comma if the first line has one, else whitespace
    has_header: bool = True


IRIS_SCHEMA = DatasetSchema(
    feature_columns=("sepal_length", "sepal_width", "petal_length", "petal_width"),
    label_column="species",
    label_map={"setosa": 1, "versicolor": 2, "virginica": 3},
)


def _split_line(line: str, delimiter: str | None) -> list[str]:
    if delimiter == ",":
        return next(csv.reader([line]))
    if delimiter is None:
        return line.split()
    return [cell.strip() for cell in line.split(delimiter)]


def load_delimited(path: str | Path, schema: DatasetSchema) -> TrainingDataset:
    """Parse a delimited file into a validated dataset; errors carry row numbers."""
    path = Path(path)
    text = path.read_text()
    raw_lines = [ln for ln in text.splitlines() if ln.strip()]
    if not raw_lines:
        raise InputError(f"{path}: file contains zero data rows")

    delimiter = schema.delimiter
    if delimiter is None:
        delimiter = "," if "," in raw_lines[0] else None  # None falls back to whitespace

    header: list[str] | None = None
    body = raw_lines
    if schema.has_header:
        header = _split_line(raw_lines[0], delimiter)
        body = raw_lines[1:]
        if not body:
            raise InputError(f"{path}: file contains zero data rows")

    def column_index(col: str | int) -> int:
        if isinstance(col, int):
            return col
        if header is None:
            raise InputError(f"{path}: named column {col!r} requires a header row")
        try:
            return header.index(col)
        except ValueError:
            raise InputError(f"{path}: column {col!r} not found in header {header}")

    feat_idx = [column_index(c) for c in schema.feature_columns]
    label_idx = column_index(schema.label_column)

    features = np.zeros((len(body), len(feat_idx)))
    labels = np.zeros(len(body), dtype=int)
    for row_no, line in enumerate(body, start=2 if schema.has_header else 1):
        cells = _split_line(line, delimiter)
        needed = max(feat_idx + [label_idx])
        if len(cells) <= needed:
            raise InputError(f"{path}: row {row_no}: expected at least {needed + 1} fields, "
                             f"got {len(cells)}")
        i = row_no - (2 if schema.has_header else 1)
        for j, ci in enumerate(feat_idx):
            try:
                features[i, j] = float(cells[ci])
            except ValueError:
                raise InputError(f"{path}: row {row_no}: non-numeric feature value {cells[ci]!r}")
        raw_label = cells[label_idx]
        if schema.label_map is not None:
            if raw_label not in schema.label_map:
                raise InputError(f"{path}: row {row_no}: unknown label {raw_label!r}")
            labels[i] = schema.label_map[raw_label]
        else:
            try:
                labels[i] = int(raw_label)
            except ValueError:
                raise InputError(f"{path}: row {row_no}: non-integer label {raw_label!r}")
    names = tuple(str(c) for c in schema.feature_columns)
    return TrainingDataset(x=features, y=labels, feature_names=names)


@dataclass(frozen=True)
class SubsetSpec:
    """Feature columns plus a fixed row-index list, with an optional separability claim."""

    name: str
    feature_columns: tuple[str | int, ...]
    indices: tuple[int, ...]
    separable: bool | None = None

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise InputError(f"subset {self.name!r} repeats row indices")

    @classmethod
    def from_json(cls, path: str | Path) -> "SubsetSpec":
        payload = json.loads(Path(path).read_text())
        if payload.get("schema_version") != 1:
            raise InputError(f"{path}: unsupported subset schema version "
                             f"{payload.get('schema_version')!r}")
        return cls(
            name=payload["name"],
            feature_columns=tuple(payload["feature_columns"]),
            indices=tuple(int(i) for i in payload["indices"]),
            separable=payload.get("separable"),
        )

    def to_json(self) -> str:
        return json.dumps({
            "schema_version": 1,
            "name": self.name,
            "feature_columns": list(self.feature_columns),
            "indices": list(self.indices),
            "separable": self.separable,
        }, indent=2)


def make_subset(dataset: TrainingDataset, spec: SubsetSpec,
                validate: bool = True) -> TrainingDataset:
    """Row/column subset of a dataset; certifies the separability flag when present.

    Separability is decided by minimizing the hinge loss: the flag is accepted
    iff the achievable loss is (not) below SEPARABILITY_HINGE_TOL.
    """
    idx = np.asarray(spec.indices, dtype=int)
    if idx.size == 0:
        raise InputError(f"subset {spec.name!r} selects zero rows")
    if idx.min() < 0 or idx.max() >= dataset.n_samples:
        raise InputError(f"subset {spec.name!r} has row indices outside 0..{dataset.n_samples - 1}")

    if dataset.feature_names is not None:
        name_to_col = {nm: i for i, nm in enumerate(dataset.feature_names)}
    else:
        name_to_col = {}
    cols = []
    for c in spec.feature_columns:
        if isinstance(c, int):
            col = c
        elif c in name_to_col:
            col = name_to_col[c]
        else:
            raise InputError(f"subset {spec.name!r}: unknown feature column {c!r}")
        if not 0 <= col < dataset.n_features:
            raise InputError(f"subset {spec.name!r}: feature column {col} out of range")
        cols.append(col)

    sub = TrainingDataset(
        x=dataset.x[np.ix_(idx, cols)],
        y=dataset.y[idx],
        n_classes=dataset.n_classes,
        feature_names=tuple(str(c) for c in spec.feature_columns),
    )
    if validate and spec.separable is not None:
        from .drs import minimize_hinge

        result = minimize_hinge(sub, max_iterations=60_000, tolerance=1e-9)
        achieved_separable = result.hinge_loss <= SEPARABILITY_HINGE_TOL
        if achieved_separable != spec.separable:
            raise InputError(
                f"subset {spec.name!r} claims separable={spec.separable} but the minimized "
                f"hinge loss is {result.hinge_loss:.3e} (DRS residual {result.residual:.1e})")
    return sub


def builtin_path(filename: str) -> Path:
    """Path of a packaged data file (iris table or subset spec)."""
    ref = resources.files("hiersvm._assets").joinpath(filename)
    with resources.as_file(ref) as concrete:
        return Path(concrete)


def load_builtin_iris() -> TrainingDataset:
    return load_delimited(builtin_path("iris.csv"), IRIS_SCHEMA)


def builtin_subset_spec(name: str) -> SubsetSpec:
    """Committed benchmark subsets: 'sep' or 'nsep'."""
    files = {"sep": "subset_sep.json", "nsep": "subset_nsep.json"}
    if name not in files:
        raise InputError(f"unknown builtin subset {name!r}; choose from {sorted(files)}")
    return SubsetSpec.from_json(builtin_path(files[name]))


def write_dataset_csv(dataset: TrainingDataset, path: str | Path) -> None:
    """Write a dataset as a comma-delimited table with integer labels."""
    names = dataset.feature_names or tuple(f"x{i + 1}" for i in range(dataset.n_features))
    lines = [",".join([*names, "label"])]
    for i in range(dataset.n_samples):
        cells = [repr(float(v)) for v in dataset.x[i]]
        cells.append(str(int(dataset.y[i])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def numeric_label_schema(n_features: int) -> DatasetSchema:
    """Schema matching write_dataset_csv output."""
    return DatasetSchema(
        feature_columns=tuple(range(n_features)),
        label_column=n_features,
        label_map=None,
    )
