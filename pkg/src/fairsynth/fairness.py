"""Dataset-level parity measurement over joint protected groups.

Groups are always the Cartesian product of ALL protected columns — never
per-attribute marginals — so that subgroup imbalances hidden behind fair
marginals (gerrymandered splits) are visible to every metric here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .data import Dataset
from .errors import ValidationError
from .schema import Schema

FOUR_FIFTHS = 0.8


@dataclass(frozen=True)
class GroupRates:
    """Observed positive-outcome rate per joint protected group.

    Keys are tuples of (protected column name, category label) in schema
    order; combinations with zero rows are omitted. Rows with a missing
    value in any protected column are not counted.
    """

    protected: tuple
    counts: dict
    rates: dict

    def __post_init__(self):
        if set(self.counts) != set(self.rates):
            raise ValidationError("counts and rates cover different groups")


def group_positive_rates(data: Dataset, schema: Schema | None = None) -> GroupRates:
    """Positive-class rate for every observed joint protected group."""
    schema = schema or data.schema
    prot = schema.protected
    if not prot:
        raise ValidationError("schema has no protected columns")
    target = schema.target
    target_cells = data.column(target.name)
    prot_cells = [data.column(c.name) for c in prot]
    counts: dict = {}
    positives: dict = {}
    for i in range(data.n_rows):
        values = tuple(cells[i] for cells in prot_cells)
        if any(v is None for v in values):
            continue
        key = tuple((c.name, v) for c, v in zip(prot, values))
        counts[key] = counts.get(key, 0) + 1
        if target_cells[i] == target.positive_class:
            positives[key] = positives.get(key, 0) + 1
    rates = {k: positives.get(k, 0) / n for k, n in counts.items()}
    return GroupRates(
        protected=tuple(c.name for c in prot), counts=counts, rates=rates
    )


def parity_difference(rates: GroupRates) -> float:
    """Max group rate minus min group rate, in [0, 1]."""
    if len(rates.rates) < 2:
        raise ValidationError("parity difference needs at least two groups")
    values = list(rates.rates.values())
    return max(values) - min(values)


def disparate_impact(rates: GroupRates):
    """(min rate / max rate, passes four-fifths rule).

    Returns (None, None) when every group rate is zero, where the ratio is
    undefined; callers report that case as such rather than as a number.
    """
    if len(rates.rates) < 2:
        raise ValidationError("disparate impact needs at least two groups")
    values = list(rates.rates.values())
    highest = max(values)
    if highest == 0:
        return None, None
    di = min(values) / highest
    return di, di >= FOUR_FIFTHS


def fairness_report(data: Dataset, schema: Schema | None = None) -> dict:
    """JSON-ready report: group counts/rates, parity difference, DI, 4/5 check."""
    rates = group_positive_rates(data, schema)
    di, passes = disparate_impact(rates)
    return {
        "protected": list(rates.protected),
        "groups": [
            {
                "values": {col: val for col, val in key},
                "count": rates.counts[key],
                "positive_rate": rates.rates[key],
            }
            for key in sorted(rates.counts)
        ],
        "parity_difference": parity_difference(rates),
        "disparate_impact": di,
        "four_fifths_pass": passes,
    }
