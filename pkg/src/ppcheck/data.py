"""Validated containers for observations, predictive draws and prediction tables.

Everything here is immutable after construction: arrays are copied and
flagged read-only so tables can be shared between checks freely.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

ROW_SUM_TOL = 1e-9


class DataError(ValueError):
    """Raised when input data violates a table invariant."""


class PairingError(DataError):
    def __init__(self, n_obs: int, n_draws: int):
        super().__init__(
            f"dimension mismatch: {n_obs} observations but draws have {n_draws} columns"
        )
        self.n_obs = n_obs
        self.n_draws = n_draws


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr.ravel()))[0])
        raise DataError(f"{what}: non-finite value at flat index {bad}")


@dataclass(frozen=True)
class ObservationSample:
    values: np.ndarray
    label: str = "y"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise DataError("observations must be a 1-d vector")
        if arr.size < 1:
            raise DataError("observations must contain at least one value")
        _check_finite(arr, self.label)
        object.__setattr__(self, "values", _frozen(arr))

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PredictiveDraws:
    """S x N matrix of predictive replicates, one row per draw."""

    matrix: np.ndarray
    draw_ids: np.ndarray | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim == 1:
            mat = mat[None, :]
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise DataError("predictive draws must be a non-empty S x N matrix")
        _check_finite(mat, "predictive draws")
        ids = np.arange(1, mat.shape[0] + 1) if self.draw_ids is None else self.draw_ids
        ids = np.asarray(ids, dtype=np.int64)
        if ids.shape != (mat.shape[0],):
            raise DataError("draw_ids must have one entry per draw")
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "draw_ids", _frozen(ids, dtype=np.int64))

    @property
    def n_draws(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_obs(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class BinaryPredictionTable:
    predicted_prob: np.ndarray
    outcome: np.ndarray
    covariates: Mapping[str, np.ndarray] = field(default_factory=dict)
    predictive_outcome_draws: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.predicted_prob, dtype=float)
        y = np.asarray(self.outcome, dtype=float)
        if p.ndim != 1 or y.shape != p.shape:
            raise DataError("predicted_prob and outcome must be vectors of equal length")
        if p.size < 1:
            raise DataError("prediction table is empty")
        _check_finite(p, "predicted_prob")
        _check_finite(y, "outcome")
        if np.any((p < 0) | (p > 1)):
            raise DataError("predicted probability outside [0, 1]")
        if np.any((y != 0) & (y != 1)):
            raise DataError("binary outcome must be 0 or 1")
        covs = {}
        for name, col in dict(self.covariates).items():
            col = np.asarray(col, dtype=float)
            if col.shape != p.shape:
                raise DataError(f"covariate {name!r} has wrong length")
            _check_finite(col, name)
            covs[name] = _frozen(col)
        draws = self.predictive_outcome_draws
        if draws is not None:
            draws = np.asarray(draws, dtype=float)
            if draws.ndim != 2 or draws.shape[1] != p.size:
                raise PairingError(p.size, draws.shape[-1] if draws.ndim else 0)
            if np.any((draws != 0) & (draws != 1)):
                raise DataError("predictive outcome draws must be 0 or 1")
            draws = _frozen(draws.astype(np.int8), dtype=np.int8)
        object.__setattr__(self, "predicted_prob", _frozen(p))
        object.__setattr__(self, "outcome", _frozen(y.astype(np.int8), dtype=np.int8))
        object.__setattr__(self, "covariates", covs)
        object.__setattr__(self, "predictive_outcome_draws", draws)

    @property
    def n(self) -> int:
        return self.predicted_prob.size


@dataclass(frozen=True)
class CategoricalPredictionTable:
    """Row i of ``prob_matrix`` holds the predicted probabilities of categories 1..M."""

    prob_matrix: np.ndarray
    outcome: np.ndarray
    ordered: bool = False

    def __post_init__(self):
        P = np.asarray(self.prob_matrix, dtype=float)
        y = np.asarray(self.outcome)
        if P.ndim != 2 or P.shape[1] < 2:
            raise DataError("prob_matrix must be N x M with M >= 2")
        if y.shape != (P.shape[0],):
            raise DataError("outcome length must match prob_matrix rows")
        _check_finite(P, "prob_matrix")
        if np.any((P < 0) | (P > 1)):
            raise DataError("category probability outside [0, 1]")
        sums = P.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise DataError(f"row {int(bad[0])} probabilities sum to {sums[bad[0]]!r}, not 1")
        yf = np.asarray(y, dtype=float)
        _check_finite(yf, "outcome")
        if np.any(yf != np.round(yf)) or np.any((yf < 1) | (yf > P.shape[1])):
            raise DataError(f"categorical outcome must be an integer in 1..{P.shape[1]}")
        object.__setattr__(self, "prob_matrix", _frozen(P))
        object.__setattr__(self, "outcome", _frozen(yf.astype(np.int64), dtype=np.int64))

    @property
    def n_categories(self) -> int:
        return self.prob_matrix.shape[1]


def validate_pairing(obs: ObservationSample, draws: PredictiveDraws) -> None:
    """Raise :class:`PairingError` unless the draws have one column per observation."""
    if draws.n_obs != obs.n:
        raise PairingError(obs.n, draws.n_obs)


# ---------------------------------------------------------------------------
# Schemas and file IO


@dataclass(frozen=True)
class ObservationSchema:
    column: str = "y"


@dataclass(frozen=True)
class DrawsSchema:
    """Wide draws file: one row per draw, one column per observation.

    ``columns`` selects observation columns by name (default: every column
    except ``id_column``).
    """

    columns: Sequence[str] | None = None
    id_column: str = "draw"


@dataclass(frozen=True)
class BinarySchema:
    pred: str = "pred"
    outcome: str = "y"
    covariates: Sequence[str] = ()


@dataclass(frozen=True)
class CategoricalSchema:
    prob_columns: Sequence[str]
    outcome: str = "y"
    ordered: bool = False


Schema = Union[ObservationSchema, DrawsSchema, BinarySchema, CategoricalSchema]
Table = Union[ObservationSample, PredictiveDraws, BinaryPredictionTable, CategoricalPredictionTable]


def _read_records(path: Path) -> tuple[list[str], list[dict]]:
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            try:
                records = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(records, list) or not all(isinstance(r, dict) for r in records):
            raise DataError(f"{path}: expected a JSON array of records")
        header: list[str] = []
        for rec in records:
            header.extend(k for k in rec if k not in header)
        return header, records
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in reader.fieldnames]
        records = []
        for row in reader:
            records.append({h.strip() if h else h: v for h, v in row.items()})
    return header, records


def _column(header, records, name, path) -> np.ndarray:
    if name not in header:
        raise DataError(f"{path}: missing column {name!r}")
    out = np.empty(len(records))
    for i, rec in enumerate(records):
        cell = rec.get(name)
        if cell is None or (isinstance(cell, str) and cell.strip() == ""):
            raise DataError(f"{path}: missing value in column {name!r}, row {i + 1}")
        try:
            out[i] = float(cell)
        except (TypeError, ValueError):
            raise DataError(
                f"{path}: non-numeric cell {cell!r} in column {name!r}, row {i + 1}"
            ) from None
    if not np.all(np.isfinite(out)):
        i = int(np.flatnonzero(~np.isfinite(out))[0])
        raise DataError(f"{path}: non-finite value in column {name!r}, row {i + 1}")
    return out


def load_table(path, schema: Schema) -> Table:
    """Read a CSV (header row required) or JSON array-of-records file.

    Row order is preserved. The concrete table type follows the schema type.
    """
    path = Path(path)
    header, records = _read_records(path)
    if not records:
        raise DataError(f"{path}: no data rows")
    if isinstance(schema, ObservationSchema):
        return ObservationSample(_column(header, records, schema.column, path), label=schema.column)
    if isinstance(schema, DrawsSchema):
        cols = list(schema.columns) if schema.columns else [h for h in header if h != schema.id_column]
        mat = np.column_stack([_column(header, records, c, path) for c in cols])
        ids = None
        if schema.id_column in header:
            ids = _column(header, records, schema.id_column, path)
            if np.any(ids != np.round(ids)):
                raise DataError(f"{path}: draw ids must be integers")
        return PredictiveDraws(mat, ids)
    if isinstance(schema, BinarySchema):
        covs = {c: _column(header, records, c, path) for c in schema.covariates}
        return BinaryPredictionTable(
            _column(header, records, schema.pred, path),
            _column(header, records, schema.outcome, path),
            covariates=covs,
        )
    if isinstance(schema, CategoricalSchema):
        P = np.column_stack([_column(header, records, c, path) for c in schema.prob_columns])
        y = _column(header, records, schema.outcome, path)
        return CategoricalPredictionTable(P, y, ordered=schema.ordered)
    raise TypeError(f"unsupported schema {schema!r}")


def _fmt(v) -> str:
    # 17 significant digits round-trips every double
    return format(float(v), ".17g")


def write_table(table: Table, path, schema: Schema | None = None) -> None:
    """Write ``table`` as CSV such that ``load_table`` reproduces it bit-exactly."""
    path = Path(path)
    if isinstance(table, ObservationSample):
        col = schema.column if isinstance(schema, ObservationSchema) else table.label
        header, rows = [col], [[_fmt(v)] for v in table.values]
    elif isinstance(table, PredictiveDraws):
        names = (
            list(schema.columns)
            if isinstance(schema, DrawsSchema) and schema.columns
            else [f"y{j + 1}" for j in range(table.n_obs)]
        )
        header = ["draw", *names]
        rows = [[str(int(i)), *map(_fmt, row)] for i, row in zip(table.draw_ids, table.matrix)]
    elif isinstance(table, BinaryPredictionTable):
        sch = schema if isinstance(schema, BinarySchema) else BinarySchema(covariates=tuple(table.covariates))
        header = [sch.pred, sch.outcome, *table.covariates]
        rows = [
            [_fmt(p), str(int(y)), *(_fmt(table.covariates[c][i]) for c in table.covariates)]
            for i, (p, y) in enumerate(zip(table.predicted_prob, table.outcome))
        ]
    elif isinstance(table, CategoricalPredictionTable):
        if isinstance(schema, CategoricalSchema):
            pcols, ycol = list(schema.prob_columns), schema.outcome
        else:
            pcols, ycol = [f"p{m + 1}" for m in range(table.n_categories)], "y"
        header = [*pcols, ycol]
        rows = [[*map(_fmt, P), str(int(y))] for P, y in zip(table.prob_matrix, table.outcome)]
    else:
        raise TypeError(f"cannot write {type(table).__name__}")
    text_rows = [",".join(header)] + [",".join(r) for r in rows]
    atomic_write_text(path, "\n".join(text_rows) + "\n")


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory followed by rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
