"""Shared toys and independent oracles for the test suite.

Oracles here are deliberately written as brute force / first principles so
they stay independent of the library code paths they check.
"""

import numpy as np
import pytest

from fairsynth import ColumnSpec, Dataset, Schema


def toy_schema():
    """3 columns: protected(2 cats), plain(3 cats), target(2 cats)."""
    return Schema(
        [
            ColumnSpec("group", "categorical", role="protected"),
            ColumnSpec("shade", "categorical"),
            ColumnSpec("label", "categorical", role="target", positive_class="yes"),
        ]
    )


def toy_dataset(n=60, bias=0.35, seed=0):
    """Biased toy table: P(label=yes) differs across the protected groups."""
    rng = np.random.default_rng(seed)
    groups = np.where(rng.random(n) < 0.5, "a", "b")
    shade = rng.choice(["red", "green", "blue"], size=n, p=[0.5, 0.3, 0.2])
    p_yes = np.where(groups == "a", 0.5 + bias, 0.5 - bias)
    label = np.where(rng.random(n) < p_yes, "yes", "no")
    return Dataset(
        toy_schema(),
        {"group": list(groups), "shade": list(shade), "label": list(label)},
    )


@pytest.fixture
def small_toy():
    return toy_dataset(n=120, seed=1)


def auc_bruteforce(scores, labels):
    """Pairwise Mann-Whitney probability; ties count one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels != 1]
    if len(pos) == 0 or len(neg) == 0:
        return None
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def cramers_v_oracle(xs, ys):
    """Chi-square based V from first principles over two label sequences."""
    xcats = sorted(set(xs))
    ycats = sorted(set(ys))
    table = np.zeros((len(xcats), len(ycats)))
    for x, y in zip(xs, ys):
        table[xcats.index(x), ycats.index(y)] += 1
    n = table.sum()
    chi2 = 0.0
    for i in range(len(xcats)):
        for j in range(len(ycats)):
            expected = table[i].sum() * table[:, j].sum() / n
            if expected > 0:
                chi2 += (table[i, j] - expected) ** 2 / expected
    k = min(len(xcats), len(ycats))
    if k < 2:
        return 0.0
    return float(np.sqrt(chi2 / (n * (k - 1))))


def quantile_oracle(values, q):
    """Sorted-order quantile with linear interpolation between neighbours."""
    xs = sorted(values)
    pos = (len(xs) - 1) * q
    lo = int(np.floor(pos))
    hi = int(np.ceil(pos))
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])
