"""Downstream-model audit: logistic regression on original vs synthetic data.

The audit answers two questions about a trained generator: do classifiers
fitted on its samples still generalize to real holdout data (accuracy,
AUC, F1), and do they score protected groups more evenly than classifiers
fitted on the original data (propensity histograms, mean gap, KS)? The
downstream trainer applies no fairness treatment of its own; any gap
reduction comes entirely from the training data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model as genmodel
from .data import Dataset, decode
from .errors import NumericError, ValidationError
from .nn import OptimizerState, adam_step
from .rng import derive_seed, make_rng
from .schema import CATEGORICAL, Schema

HIST_BINS = 50


def split_holdout(data: Dataset, fraction: float = 0.2, seed: int = 0):
    """Seeded shuffle split into (train, holdout); disjoint and exhaustive."""
    if not 0.0 < fraction < 1.0:
        raise ValidationError("holdout fraction must be in (0, 1)")
    n = data.n_rows
    n_holdout = min(max(int(round(n * fraction)), 1), n - 1)
    perm = make_rng(derive_seed(seed, "split")).permutation(n)
    holdout_idx = np.sort(perm[:n_holdout])
    train_idx = np.sort(perm[n_holdout:])
    return data.take(train_idx), data.take(holdout_idx)


@dataclass(frozen=True)
class FeatureMap:
    """Feature layout frozen at fit time.

    Categorical columns one-hot over the training categories (missing is
    its own category; unseen values at transform time map to an all-zero
    block). Numeric columns standardized by training mean/std; a missing
    numeric cell maps to the mean (z = 0).
    """

    columns: tuple  # (name, "categorical", (labels...)) or (name, "numeric", (mean, std))

    @property
    def dim(self) -> int:
        d = 0
        for _, kind, spec in self.columns:
            d += len(spec) if kind == CATEGORICAL else 1
        return d

    def transform(self, data: Dataset) -> np.ndarray:
        n = data.n_rows
        x = np.zeros((n, self.dim))
        off = 0
        for name, kind, spec in self.columns:
            cells = data.column(name)
            if kind == CATEGORICAL:
                lookup = {c: i for i, c in enumerate(spec)}
                for i, v in enumerate(cells):
                    key = "?" if v is None else v
                    j = lookup.get(key)
                    if j is not None:
                        x[i, off + j] = 1.0
                off += len(spec)
            else:
                mean, std = spec
                col = np.array([mean if v is None else v for v in cells], dtype=float)
                x[:, off] = (col - mean) / std
                off += 1
        return x


def build_feature_map(train: Dataset, schema: Schema) -> FeatureMap:
    """Fit the one-hot/standardization layout on training rows only."""
    cols = []
    for spec in schema.columns:
        if spec.role == "target":
            continue
        cells = train.column(spec.name)
        if spec.kind == CATEGORICAL:
            seen, seen_set = [], set()
            for v in cells:
                key = "?" if v is None else v
                if key not in seen_set:
                    seen_set.add(key)
                    seen.append(key)
            cols.append((spec.name, CATEGORICAL, tuple(seen)))
        else:
            vals = np.array([v for v in cells if v is not None], dtype=float)
            if vals.size == 0:
                raise ValidationError(f"numeric column {spec.name!r} has no values")
            std = float(vals.std())
            cols.append((spec.name, "numeric", (float(vals.mean()), std if std > 0 else 1.0)))
    return FeatureMap(columns=tuple(cols))


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    epochs: int = 300
    l2: float = 1e-4
    seed: int = 0


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    feature_map: FeatureMap
    positive_class: str
    target_column: str

    def propensities(self, data: Dataset) -> np.ndarray:
        """P(positive class) per row."""
        x = self.feature_map.transform(data)
        z = x @ self.weights + self.bias
        return 1.0 / (1.0 + np.exp(-z))


def _labels(data: Dataset, schema: Schema) -> np.ndarray:
    target = schema.target
    return np.array(
        [1.0 if v == target.positive_class else 0.0 for v in data.column(target.name)]
    )


def fit_logreg(train: Dataset, schema: Schema, cfg: LogRegConfig = LogRegConfig()) -> LogRegModel:
    """Full-batch Adam on L2-regularized log-loss; positive-vs-rest target.

    Features: one-hot categoricals (protected columns kept as predictors)
    plus standardized raw numerics, all fitted on the training rows only.
    Zero initialization; the problem is convex, so the fit is deterministic.
    """
    fmap = build_feature_map(train, schema)
    x = fmap.transform(train)
    y = _labels(train, schema)
    n = x.shape[0]
    w = np.zeros(x.shape[1])
    b = np.zeros(1)
    opt = OptimizerState.for_params([w, b], learning_rate=cfg.learning_rate)
    for step in range(cfg.epochs):
        z = x @ w + b[0]
        p = 1.0 / (1.0 + np.exp(-z))
        eps = 1e-12
        loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
        loss += 0.5 * cfg.l2 * (w @ w)
        if not np.isfinite(loss):
            raise NumericError(f"logistic regression diverged at step {step}")
        resid = (p - y) / n
        gw = x.T @ resid + cfg.l2 * w
        gb = np.array([resid.sum()])
        adam_step([w, b], [gw, gb], opt)
    return LogRegModel(
        weights=w,
        bias=float(b[0]),
        feature_map=fmap,
        positive_class=schema.target.positive_class,
        target_column=schema.target.name,
    )


def logreg_loss_and_grads(model: LogRegModel, x: np.ndarray, y: np.ndarray, l2: float = 0.0):
    """(loss, [dw, db]) of the regularized log-loss at the model's parameters."""
    w, b = model.weights, model.bias
    z = x @ w + b
    p = 1.0 / (1.0 + np.exp(-z))
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss += 0.5 * l2 * (w @ w)
    resid = (p - y) / x.shape[0]
    return float(loss), [x.T @ resid + l2 * w, np.array([resid.sum()])]


def auc_score(scores: np.ndarray, labels: np.ndarray):
    """Rank-statistic AUC with midranks for ties (Mann-Whitney probability).

    Returns None when only one class is present.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores))
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum_pos = ranks[labels == 1].sum()
    return float((rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(model: LogRegModel, holdout: Dataset):
    """(accuracy, auc, f1) on a holdout at threshold 0.5.

    AUC is None for a single-class holdout; F1 counts the declared
    positive class as positive.
    """
    if holdout.n_rows == 0:
        raise ValidationError("empty holdout")
    schema = holdout.schema
    p = model.propensities(holdout)
    y = _labels(holdout, schema)
    pred = (p >= 0.5).astype(float)
    accuracy = float((pred == y).mean())
    tp = float(((pred == 1) & (y == 1)).sum())
    fp = float(((pred == 1) & (y == 0)).sum())
    fn = float(((pred == 0) & (y == 1)).sum())
    f1 = 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) > 0 else 0.0
    return accuracy, auc_score(p, y), f1


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic max |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def propensity_audit(model: LogRegModel, holdout: Dataset, protected: str) -> dict:
    """Per-group propensity histograms plus the two-largest-group gap and KS."""
    spec = holdout.schema.column(protected)
    if spec.kind != CATEGORICAL:
        raise ValidationError(f"protected column {protected!r} must be categorical")
    p = model.propensities(holdout)
    cells = holdout.column(protected)
    groups: dict = {}
    for i, v in enumerate(cells):
        if v is None:
            continue
        groups.setdefault(v, []).append(p[i])
    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    report = {"protected": protected, "groups": {}, "mean_gap": None, "ks": None}
    for label, values in groups.items():
        arr = np.asarray(values)
        hist, _ = np.histogram(arr, bins=edges)
        report["groups"][label] = {
            "count": int(arr.size),
            "mean_propensity": float(arr.mean()),
            "histogram": hist.tolist(),
        }
    largest = sorted(groups, key=lambda k: len(groups[k]), reverse=True)[:2]
    if len(largest) == 2:
        g1, g2 = (np.asarray(groups[k]) for k in largest)
        report["mean_gap"] = float(abs(g1.mean() - g2.mean()))
        report["ks"] = ks_statistic(g1, g2)
        report["compared_groups"] = list(largest)
    return report


@dataclass
class AuditReport:
    """Original- vs synthetic-trained downstream results, JSON-ready."""

    holdout_rows: int
    train_rows: int
    reps: int
    original: dict = field(default_factory=dict)
    synthetic_reps: list = field(default_factory=list)
    synthetic_mean: dict = field(default_factory=dict)
    synthetic_median: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "holdout_rows": self.holdout_rows,
            "train_rows": self.train_rows,
            "reps": self.reps,
            "original": self.original,
            "synthetic_reps": self.synthetic_reps,
            "synthetic_mean": self.synthetic_mean,
            "synthetic_median": self.synthetic_median,
        }

    def write_histogram_csv(self, path) -> None:
        """Long-form (source, group, bin_low, bin_high, count) for plotting."""
        edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("source,rep,group,bin_low,bin_high,count\n")
            sources = [("original", 0, self.original.get("propensity", {}))]
            for r, rep in enumerate(self.synthetic_reps):
                sources.append(("synthetic", r, rep.get("propensity", {})))
            for source, r, audit in sources:
                for label, g in audit.get("groups", {}).items():
                    for k, count in enumerate(g["histogram"]):
                        fh.write(
                            f"{source},{r},{label},{edges[k]!r},{edges[k + 1]!r},{count}\n"
                        )


def _metrics_dict(model: LogRegModel, holdout: Dataset, protected: str) -> dict:
    accuracy, auc, f1 = evaluate(model, holdout)
    return {
        "accuracy": accuracy,
        "auc": auc,
        "f1": f1,
        "propensity": propensity_audit(model, holdout, protected),
    }


def audit(
    original: Dataset,
    gen_model,
    reps: int = 5,
    seed: int = 0,
    holdout_fraction: float = 0.2,
    logreg: LogRegConfig = LogRegConfig(),
) -> AuditReport:
    """Fit downstream classifiers on original vs repeated synthetic samples.

    Every repetition draws a fresh synthetic sample of the training-split
    size from the generator, fits a classifier on it, and evaluates on the
    SAME original-data holdout as the original-trained classifier. The
    protected column for propensity audits is the first protected column
    of the schema.
    """
    if reps < 1:
        raise ValidationError("reps must be >= 1")
    schema = original.schema
    if not schema.protected:
        raise ValidationError("schema has no protected columns")
    protected = schema.protected[0].name
    train, holdout = split_holdout(original, holdout_fraction, seed)
    report = AuditReport(holdout_rows=holdout.n_rows, train_rows=train.n_rows, reps=reps)

    original_model = fit_logreg(train, schema, logreg)
    report.original = _metrics_dict(original_model, holdout, protected)

    for r in range(reps):
        synth_codes = genmodel.sample(gen_model, train.n_rows, derive_seed(seed, "rep", r))
        synth = decode(synth_codes, derive_seed(seed, "decode", r))
        synth_model = fit_logreg(synth, schema, logreg)
        report.synthetic_reps.append(_metrics_dict(synth_model, holdout, protected))

    for stat, fn in (("mean", np.mean), ("median", np.median)):
        agg = {}
        for key in ("accuracy", "auc", "f1"):
            values = [m[key] for m in report.synthetic_reps if m[key] is not None]
            agg[key] = float(fn(values)) if values else None
        gaps = [
            m["propensity"]["mean_gap"]
            for m in report.synthetic_reps
            if m["propensity"]["mean_gap"] is not None
        ]
        agg["propensity_mean_gap"] = float(fn(gaps)) if gaps else None
        if stat == "mean":
            report.synthetic_mean = agg
        else:
            report.synthetic_median = agg
    return report
