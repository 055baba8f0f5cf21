"""Representativeness metrics: univariate TV distances, bivariate Cramer's V.

All comparisons run on the ORIGINAL-fitted encoder's categories/bins for
both datasets; synthetic data is never re-binned, otherwise the distances
would not be comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Encoder, encode, encode_cells
from .errors import ValidationError
from .schema import Schema


def tv_distance(p, q) -> float:
    """Total variation distance 0.5 * sum |p_k - q_k| between distributions.

    Inputs are aligned probability vectors over the same category support
    (missing entries must already be zero-filled); each must sum to 1
    within 1e-9.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValidationError("distributions have different support sizes")
    for name, dist in (("p", p), ("q", q)):
        if abs(dist.sum() - 1.0) > 1e-9 or (dist < 0).any():
            raise ValidationError(f"{name} is not a probability distribution")
    return float(0.5 * np.abs(p - q).sum())


def column_distribution(data: Dataset, column: str, enc: Encoder) -> np.ndarray:
    """Empirical distribution of a column over the encoder's codes."""
    codes = encode_column(data, column, enc)
    k = enc.cardinality(column)
    counts = np.bincount(codes, minlength=k).astype(float)
    return counts / counts.sum()


def encode_column(data: Dataset, column: str, enc: Encoder) -> np.ndarray:
    """Codes for one column only (avoids encoding the full table)."""
    return encode_cells(data.column(column), data.schema.column(column), enc)


def contingency_table(data: Dataset, a: str, b: str, enc: Encoder) -> np.ndarray:
    """r x c table of joint code counts for two columns."""
    ca = encode_column(data, a, enc)
    cb = encode_column(data, b, enc)
    ka, kb = enc.cardinality(a), enc.cardinality(b)
    table = np.bincount(ca * kb + cb, minlength=ka * kb).reshape(ka, kb)
    return table.astype(float)


def cramers_v_from_table(table: np.ndarray) -> float:
    """Cramer's V from a contingency table, clamped to [0, 1].

    Rows/columns with zero marginals are dropped; a table left with a
    single row or column is degenerate and yields 0.
    """
    table = np.asarray(table, dtype=float)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    r, c = table.shape
    if min(r, c) < 2:
        return 0.0
    n = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        cells = np.where(expected > 0, (table - expected) ** 2 / expected, 0.0)
    chi2 = cells.sum()
    v = np.sqrt(chi2 / (n * (min(r, c) - 1)))
    return float(min(max(v, 0.0), 1.0))


def cramers_v(data: Dataset, a: str, b: str, enc: Encoder) -> float:
    """Cramer's V between two columns on the encoder's discrete codes."""
    if data.n_rows < 1:
        raise ValidationError("Cramer's V needs at least one row")
    return cramers_v_from_table(contingency_table(data, a, b, enc))


@dataclass(frozen=True)
class PairDrift:
    a: str
    b: str
    v_original: float
    v_synthetic: float
    delta: float
    flagged: bool
    expected_drift: bool


@dataclass(frozen=True)
class FidelityReport:
    """Per-column TV plus pairwise V drift between original and synthetic."""

    tv: dict
    pairs: tuple
    drift_threshold: float
    degenerate_columns: tuple

    @property
    def flagged_pairs(self) -> list[PairDrift]:
        return [p for p in self.pairs if p.flagged]

    def pair(self, a: str, b: str) -> PairDrift:
        for p in self.pairs:
            if {p.a, p.b} == {a, b}:
                return p
        raise ValidationError(f"no pair ({a}, {b}) in report")

    def to_dict(self) -> dict:
        return {
            "tv": dict(self.tv),
            "drift_threshold": self.drift_threshold,
            "degenerate_columns": list(self.degenerate_columns),
            "pairs": [
                {
                    "a": p.a,
                    "b": p.b,
                    "v_original": p.v_original,
                    "v_synthetic": p.v_synthetic,
                    "delta": p.delta,
                    "flagged": p.flagged,
                    "expected_drift": p.expected_drift,
                }
                for p in self.pairs
            ],
        }

    def write_tv_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("column,tv_distance\n")
            for name, value in self.tv.items():
                fh.write(f"{name},{value!r}\n")

    def write_pairs_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("a,b,v_original,v_synthetic,delta,flagged,expected_drift\n")
            for p in self.pairs:
                fh.write(
                    f"{p.a},{p.b},{p.v_original!r},{p.v_synthetic!r},"
                    f"{p.delta!r},{int(p.flagged)},{int(p.expected_drift)}\n"
                )


def fidelity_report(
    original: Dataset,
    synthetic: Dataset,
    enc: Encoder,
    schema: Schema | None = None,
    proxy_columns=(),
    drift_threshold: float = 0.1,
) -> FidelityReport:
    """Compare original vs synthetic on the original-fitted discretization.

    Pairs whose |delta V| exceeds the threshold are flagged; a flag is
    annotated as expected when the pair joins the target with a protected
    or declared proxy column (those associations are deliberately removed
    by parity-constrained training).
    """
    schema = schema or original.schema
    if original.schema.names != synthetic.schema.names:
        raise ValidationError("original and synthetic schemas differ")
    names = schema.names
    target = schema.target.name
    sensitive = {c.name for c in schema.protected} | set(proxy_columns)

    enc_orig = encode(original, enc)
    enc_syn = encode(synthetic, enc)

    tv = {}
    degenerate = []
    dists_orig = {}
    dists_syn = {}
    for name in names:
        k = enc.cardinality(name)
        po = np.bincount(enc_orig.column_codes(name), minlength=k).astype(float)
        ps = np.bincount(enc_syn.column_codes(name), minlength=k).astype(float)
        dists_orig[name] = po
        dists_syn[name] = ps
        tv[name] = tv_distance(po / po.sum(), ps / ps.sum())
        if k < 2:
            degenerate.append(name)

    pairs = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = names[i], names[j]
            ka, kb = enc.cardinality(a), enc.cardinality(b)
            to = np.bincount(
                enc_orig.column_codes(a) * kb + enc_orig.column_codes(b),
                minlength=ka * kb,
            ).reshape(ka, kb)
            ts = np.bincount(
                enc_syn.column_codes(a) * kb + enc_syn.column_codes(b),
                minlength=ka * kb,
            ).reshape(ka, kb)
            vo = cramers_v_from_table(to)
            vs = cramers_v_from_table(ts)
            delta = abs(vo - vs)
            expected = (target in (a, b)) and bool(({a, b} - {target}) & sensitive)
            pairs.append(
                PairDrift(
                    a=a,
                    b=b,
                    v_original=vo,
                    v_synthetic=vs,
                    delta=delta,
                    flagged=delta > drift_threshold,
                    expected_drift=expected,
                )
            )
    return FidelityReport(
        tv=tv,
        pairs=tuple(pairs),
        drift_threshold=drift_threshold,
        degenerate_columns=tuple(degenerate),
    )
