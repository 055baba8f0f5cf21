"""Column metadata and dataset schemas.

A :class:`Schema` is an ordered list of :class:`ColumnSpec` entries. Exactly
one column is the prediction target (categorical, with a declared positive
class); any number of categorical columns may be marked protected. The
schema also fixes the order in which an autoregressive generator emits
columns: protected columns first, the target last, everything else in
between, so that the target head conditions on all other attributes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError

CATEGORICAL = "categorical"
NUMERIC = "numeric"

PLAIN = "plain"
PROTECTED = "protected"
TARGET = "target"


@dataclass(frozen=True)
class ColumnSpec:
    """Metadata for a single column.

    Args:
        name: unique, non-empty column name.
        kind: "categorical" or "numeric".
        role: "plain", "protected" or "target".
        positive_class: label of the favourable target category; required
            iff role == "target".
        n_bins: quantile-bin count for numeric columns (ignored otherwise).
    """

    name: str
    kind: str
    role: str = PLAIN
    positive_class: str | None = None
    n_bins: int = 10

    def __post_init__(self):
        if not self.name:
            raise ValidationError("column name must be non-empty")
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ValidationError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in (PLAIN, PROTECTED, TARGET):
            raise ValidationError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.role == TARGET:
            if self.kind != CATEGORICAL:
                raise ValidationError(f"target column {self.name!r} must be categorical")
            if not self.positive_class:
                raise ValidationError(f"target column {self.name!r} needs a positive_class")
        elif self.positive_class is not None:
            raise ValidationError(f"column {self.name!r}: positive_class only valid on the target")
        if self.role == PROTECTED and self.kind != CATEGORICAL:
            raise ValidationError(f"protected column {self.name!r} must be categorical")
        if self.kind == NUMERIC and self.n_bins < 1:
            raise ValidationError(f"column {self.name!r}: n_bins must be positive")


@dataclass(frozen=True)
class Schema:
    """Ordered column specs plus the derived generation order.

    ``generation_order`` is a permutation of column indices: all protected
    columns (in schema order), then plain columns (in schema order), then
    the target column last.
    """

    columns: tuple[ColumnSpec, ...]
    generation_order: tuple[int, ...] = field(init=False)

    def __init__(self, columns):
        cols = tuple(columns)
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate column names in schema")
        targets = [c for c in cols if c.role == TARGET]
        if len(targets) != 1:
            raise ValidationError(f"schema needs exactly one target column, got {len(targets)}")
        order = (
            [i for i, c in enumerate(cols) if c.role == PROTECTED]
            + [i for i, c in enumerate(cols) if c.role == PLAIN]
            + [i for i, c in enumerate(cols) if c.role == TARGET]
        )
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "generation_order", tuple(order))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def target(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role == TARGET)

    @property
    def protected(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.role == PROTECTED]

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise ValidationError(f"schema has no column {name!r}")

    def index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise ValidationError(f"schema has no column {name!r}")

    def with_column(self, spec: ColumnSpec) -> "Schema":
        """New schema with one extra column appended."""
        return Schema(self.columns + (spec,))

    def to_dict(self) -> dict:
        return {
            "columns": [
                {
                    "name": c.name,
                    "kind": c.kind,
                    "role": c.role,
                    "positive_class": c.positive_class,
                    "n_bins": c.n_bins,
                }
                for c in self.columns
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        cols = []
        for item in d["columns"]:
            cols.append(
                ColumnSpec(
                    name=item["name"],
                    kind=item["kind"],
                    role=item.get("role", PLAIN),
                    positive_class=item.get("positive_class"),
                    n_bins=item.get("n_bins", 10),
                )
            )
        return cls(cols)
