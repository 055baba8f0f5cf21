"""Datasets, CSV ingestion, discretization and decoding.

Raw tables are held column-major: categorical cells are strings (``None``
for a missing value, written/read as the token ``?``), numeric cells are
floats. An :class:`Encoder` turns every column into a small set of integer
codes — observed categories in first-appearance order for categorical
columns, empirical quantile bins for numeric columns — so that all
downstream modelling and measurement happens on fully discrete data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import make_rng
from .schema import CATEGORICAL, NUMERIC, ColumnSpec, Schema

MISSING_TOKEN = "?"


@dataclass(frozen=True)
class Dataset:
    """A raw table: schema plus one cell list per column.

    Categorical cells are ``str`` or ``None`` (missing); numeric cells are
    ``float``. Instances are immutable; transformations return new objects.
    """

    schema: Schema
    columns: dict

    def __post_init__(self):
        names = set(self.schema.names)
        if set(self.columns) != names:
            raise ValidationError("dataset columns do not match schema")
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValidationError(f"ragged dataset: column lengths {sorted(lengths)}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> list:
        return self.columns[name]

    def take(self, indices) -> "Dataset":
        """Row subset (new dataset) in the given index order."""
        idx = list(indices)
        return Dataset(self.schema, {k: [v[i] for i in idx] for k, v in self.columns.items()})

    def with_column(self, spec: ColumnSpec, values: list) -> "Dataset":
        if len(values) != self.n_rows:
            raise ValidationError("new column has wrong length")
        cols = dict(self.columns)
        cols[spec.name] = list(values)
        return Dataset(self.schema.with_column(spec), cols)

    def write_csv(self, path) -> None:
        """Write in schema header order; missing cells become ``?``."""
        names = self.schema.names
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            cols = [self.columns[n] for n in names]
            for i in range(self.n_rows):
                row = []
                for c in cols:
                    v = c[i]
                    if v is None:
                        row.append(MISSING_TOKEN)
                    elif isinstance(v, float):
                        row.append(repr(v) if not v.is_integer() else str(int(v)))
                    else:
                        row.append(v)
                writer.writerow(row)


def load_csv(path, schema: Schema) -> Dataset:
    """Load a comma-separated UTF-8 file with header under a schema.

    The header must cover every schema column; extra file columns are
    ignored. Cells are stripped of surrounding whitespace; the token ``?``
    denotes a missing value. Numeric cells must parse as decimal numbers —
    a malformed numeric cell is an error naming its row and column, never a
    silent missing value.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        positions = {}
        for spec in schema.columns:
            if spec.name not in header:
                raise ValidationError(f"{path}: header is missing schema column {spec.name!r}")
            positions[spec.name] = header.index(spec.name)

        columns = {name: [] for name in schema.names}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            for spec in schema.columns:
                pos = positions[spec.name]
                if pos >= len(row):
                    raise ValidationError(f"{path}: line {row_no} has too few fields")
                token = row[pos].strip()
                if token == MISSING_TOKEN:
                    columns[spec.name].append(None)
                elif spec.kind == NUMERIC:
                    try:
                        columns[spec.name].append(float(token))
                    except ValueError:
                        raise ValidationError(
                            f"{path}: line {row_no}, column {spec.name!r}: "
                            f"cannot parse numeric value {token!r}"
                        ) from None
                else:
                    columns[spec.name].append(token)
    data = Dataset(schema, columns)
    if data.n_rows == 0:
        raise ValidationError(f"{path}: no data rows")
    return data


@dataclass(frozen=True)
class Encoder:
    """Fitted per-column code books.

    ``categories[name]`` lists a categorical column's labels in first
    appearance order, with a trailing ``?`` entry iff missing values were
    observed at fit time. ``bin_edges[name]`` holds a numeric column's
    deduplicated ascending quantile edges (``k+1`` edges define ``k`` bins;
    a constant column keeps the degenerate pair ``[c, c]`` as one bin).
    """

    schema: Schema
    categories: dict
    bin_edges: dict

    def cardinality(self, name: str) -> int:
        spec = self.schema.column(name)
        if spec.kind == CATEGORICAL:
            return len(self.categories[name])
        return max(len(self.bin_edges[name]) - 1, 1)

    @property
    def cardinalities(self) -> list[int]:
        return [self.cardinality(n) for n in self.schema.names]

    def labels(self, name: str) -> list[str]:
        """Human-readable label per code (bin ranges for numeric columns)."""
        spec = self.schema.column(name)
        if spec.kind == CATEGORICAL:
            return list(self.categories[name])
        edges = self.bin_edges[name]
        if len(edges) == 2 and edges[0] == edges[1]:
            return [f"[{edges[0]:g}]"]
        return [f"[{lo:g}, {hi:g})" for lo, hi in zip(edges[:-1], edges[1:])]

    def to_dict(self) -> dict:
        return {
            "categories": {k: list(v) for k, v in self.categories.items()},
            "bin_edges": {k: [float(x) for x in v] for k, v in self.bin_edges.items()},
        }

    @classmethod
    def from_dict(cls, schema: Schema, d: dict) -> "Encoder":
        return cls(
            schema=schema,
            categories={k: list(v) for k, v in d["categories"].items()},
            bin_edges={k: np.asarray(v, dtype=float) for k, v in d["bin_edges"].items()},
        )


@dataclass(frozen=True)
class EncodedDataset:
    """Rows as per-column category codes (schema column order)."""

    schema: Schema
    encoder: Encoder
    codes: np.ndarray  # (n_rows, n_cols) int64

    @property
    def n_rows(self) -> int:
        return int(self.codes.shape[0])

    def column_codes(self, name: str) -> np.ndarray:
        return self.codes[:, self.schema.index(name)]


def quantile_bin_edges(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Empirical quantile edges at k/n_bins for k=0..n_bins, deduplicated.

    Quantiles use sorted-order linear interpolation, so the first and last
    edges are the column min and max. Duplicate edges (heavy point masses)
    collapse; a constant column keeps the pair ``[c, c]``.
    """
    qs = np.linspace(0.0, 1.0, n_bins + 1)
    edges = np.quantile(values, qs, method="linear")
    edges = np.unique(edges)
    if len(edges) == 1:
        edges = np.array([edges[0], edges[0]])
    return edges


def fit_encoder(data: Dataset) -> Encoder:
    """Fit code books on a dataset.

    Categorical categories are ordered by first appearance with ``?``
    appended iff missing values occur. Numeric bins come from
    :func:`quantile_bin_edges` over the non-missing values.
    """
    if data.n_rows == 0:
        raise ValidationError("cannot fit an encoder on an empty dataset")
    categories = {}
    bin_edges = {}
    for spec in data.schema.columns:
        cells = data.columns[spec.name]
        if spec.kind == CATEGORICAL:
            seen = []
            has_missing = False
            seen_set = set()
            for v in cells:
                if v is None or v == MISSING_TOKEN:
                    has_missing = True
                elif v not in seen_set:
                    seen_set.add(v)
                    seen.append(v)
            if has_missing:
                seen.append(MISSING_TOKEN)
            categories[spec.name] = seen
        else:
            vals = np.array([v for v in cells if v is not None], dtype=float)
            if vals.size == 0:
                raise ValidationError(f"numeric column {spec.name!r} has no observed values")
            bin_edges[spec.name] = quantile_bin_edges(vals, spec.n_bins)
    return Encoder(schema=data.schema, categories=categories, bin_edges=bin_edges)


def numeric_bin_index(edges: np.ndarray, v: float) -> int:
    """Bin i with edges[i] <= v < edges[i+1]; last bin closed above.

    Values outside the fitted range clamp to the first/last bin so that
    data encoded with a previously fitted encoder never errors on boundary
    leakage.
    """
    n_bins = max(len(edges) - 1, 1)
    if len(edges) == 2 and edges[0] == edges[1]:
        return 0
    i = int(np.searchsorted(edges, v, side="right")) - 1
    return min(max(i, 0), n_bins - 1)


def encode_cells(cells: list, spec: ColumnSpec, enc: Encoder) -> np.ndarray:
    """Codes for one column's raw cells under a fitted encoder."""
    n = len(cells)
    if spec.kind == CATEGORICAL:
        lookup = {c: i for i, c in enumerate(enc.categories[spec.name])}
        missing_code = lookup.pop(MISSING_TOKEN, None)
        col = np.empty(n, dtype=np.int64)
        for i, v in enumerate(cells):
            if v is None or v == MISSING_TOKEN:
                if missing_code is None:
                    raise ValidationError(
                        f"column {spec.name!r}, row {i}: missing value but the "
                        "encoder saw none at fit time"
                    )
                col[i] = missing_code
            else:
                code = lookup.get(v)
                if code is None:
                    raise ValidationError(
                        f"column {spec.name!r}, row {i}: unseen category {v!r}"
                    )
                col[i] = code
        return col
    edges = enc.bin_edges[spec.name]
    arr = np.empty(n, dtype=float)
    for i, v in enumerate(cells):
        if v is None:
            raise ValidationError(
                f"column {spec.name!r}, row {i}: missing numeric value cannot be encoded"
            )
        arr[i] = v
    if len(edges) == 2 and edges[0] == edges[1]:
        return np.zeros(n, dtype=np.int64)
    idx = np.searchsorted(edges, arr, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2).astype(np.int64)


def encode(data: Dataset, enc: Encoder) -> EncodedDataset:
    """Map every cell to its category/bin code.

    Unseen categorical values are errors; numeric missing values are errors
    (the discrete representation reserves missing codes for categorical
    columns only).
    """
    if data.schema.names != enc.schema.names:
        raise ValidationError("dataset schema does not match encoder schema")
    n = data.n_rows
    codes = np.empty((n, len(data.schema.columns)), dtype=np.int64)
    for j, spec in enumerate(data.schema.columns):
        codes[:, j] = encode_cells(data.columns[spec.name], spec, enc)
    return EncodedDataset(schema=data.schema, encoder=enc, codes=codes)


def decode(enc_data: EncodedDataset, seed: int) -> Dataset:
    """Map codes back to raw values.

    Categorical codes yield their labels (``?`` becomes a missing cell).
    A numeric bin code yields a uniform draw in ``[edge[i], edge[i+1])``
    from the seeded generator, or the constant for a degenerate bin.
    Round-tripping preserves categorical cells exactly and keeps numeric
    cells inside their original bin.
    """
    rng = make_rng(seed)
    schema = enc_data.schema
    enc = enc_data.encoder
    n = enc_data.n_rows
    columns = {}
    for j, spec in enumerate(schema.columns):
        col_codes = enc_data.codes[:, j]
        if spec.kind == CATEGORICAL:
            cats = enc.categories[spec.name]
            if col_codes.size and (col_codes.min() < 0 or col_codes.max() >= len(cats)):
                raise ValidationError(f"column {spec.name!r}: code out of range")
            columns[spec.name] = [
                None if cats[c] == MISSING_TOKEN else cats[c] for c in col_codes
            ]
        else:
            edges = enc.bin_edges[spec.name]
            n_bins = max(len(edges) - 1, 1)
            if col_codes.size and (col_codes.min() < 0 or col_codes.max() >= n_bins):
                raise ValidationError(f"column {spec.name!r}: code out of range")
            lo = edges[:-1][col_codes] if len(edges) > 1 else np.full(n, edges[0])
            hi = edges[1:][col_codes] if len(edges) > 1 else np.full(n, edges[0])
            draws = lo + rng.random(n) * (hi - lo)
            columns[spec.name] = [float(v) for v in draws]
    return Dataset(schema, columns)


def inject_proxy(
    data: Dataset,
    protected_col: str,
    reference_value: str,
    p: float = 0.9,
    seed: int = 0,
) -> Dataset:
    """Append an artificial ``proxy`` column correlated with a protected one.

    Rows whose protected value equals ``reference_value`` get proxy "1"
    with probability ``p``; all other rows with probability ``1 - p``. The
    new column is categorical with role "plain". Deterministic per seed.
    """
    if "proxy" in data.schema.names:
        raise ValidationError("column 'proxy' already present")
    spec = data.schema.column(protected_col)
    if spec.kind != CATEGORICAL:
        raise ValidationError(f"protected column {protected_col!r} must be categorical")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability p={p} outside [0, 1]")
    cells = data.columns[protected_col]
    if reference_value not in set(v for v in cells if v is not None):
        raise ValidationError(
            f"reference value {reference_value!r} never occurs in column {protected_col!r}"
        )
    rng = make_rng(seed)
    u = rng.random(data.n_rows)
    values = []
    for i, v in enumerate(cells):
        prob_one = p if v == reference_value else 1.0 - p
        values.append("1" if u[i] < prob_one else "0")
    return data.with_column(ColumnSpec(name="proxy", kind=CATEGORICAL), values)
