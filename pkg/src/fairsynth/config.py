"""Experiment config files: flat key paths with JSON-typed values.

Grammar, one logical line per setting::

    # comment (also allowed after a value)
    key.path = value

where ``value`` is any JSON literal (string, number, boolean, array,
object). Dotted paths build nested sections. Unknown keys are rejected so
typos fail loudly. Every run writes back the fully resolved config
(defaults expanded) next to its outputs, making configs versionable run
records.

Recognized keys::

    data.path                 str   CSV with header (see fairsynth.data.load_csv)
    schema.preset             str   "adult" (15-column census schema)
    schema.protected          list  protected column names (preset only)
    schema.n_bins             int   numeric quantile bins (default 10)
    schema.columns            list  explicit column dicts (alternative to preset)
    train.fairness_weight     float parity-penalty weight (>= 0)
    train.epochs              int
    train.batch_size          int
    train.learning_rate       float
    train.hidden_dim          int
    train.min_group_count     int
    audit.holdout_fraction    float in (0, 1)
    audit.reps                int
    proxy.column              str   protected column the proxy shadows
    proxy.reference_value     str
    proxy.probability         float
    sweep.fairness_weights    list of floats
    sweep.seeds               list of ints
    output.dir                str
    seed                      int   master seed
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .adult import adult_schema
from .errors import ValidationError
from .model import TrainConfig
from .schema import Schema

_KNOWN_KEYS = {
    "data.path",
    "schema.preset", "schema.protected", "schema.n_bins", "schema.columns",
    "train.fairness_weight", "train.epochs", "train.batch_size",
    "train.learning_rate", "train.hidden_dim", "train.min_group_count",
    "audit.holdout_fraction", "audit.reps",
    "proxy.column", "proxy.reference_value", "proxy.probability",
    "sweep.fairness_weights", "sweep.seeds",
    "output.dir", "seed",
}


def parse_flat_config(text: str) -> dict:
    """Parse the flat key-path grammar into a {dotted key: value} dict."""
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {line_no}: expected 'key = value'")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if not key:
            raise ValidationError(f"config line {line_no}: empty key")
        try:
            value = json.loads(rhs)
        except json.JSONDecodeError:
            # allow a trailing comment after a scalar value
            body = rhs.split("#", 1)[0].strip()
            try:
                value = json.loads(body)
            except json.JSONDecodeError:
                raise ValidationError(
                    f"config line {line_no}: value is not a JSON literal: {rhs!r}"
                ) from None
        if key in values:
            raise ValidationError(f"config line {line_no}: duplicate key {key!r}")
        values[key] = value
    return values


@dataclass
class ExperimentConfig:
    """Fully resolved experiment settings."""

    data_path: str
    schema: Schema
    train: TrainConfig
    holdout_fraction: float = 0.2
    reps: int = 5
    proxy_column: str | None = None
    proxy_reference_value: str | None = None
    proxy_probability: float = 0.9
    sweep_fairness_weights: list = field(default_factory=lambda: [0.0, 0.3, 1.0])
    sweep_seeds: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    output_dir: str = "out"
    seed: int = 0
    # bookkeeping for resolved-config emission
    schema_preset: str | None = None
    schema_protected: list = field(default_factory=lambda: ["sex"])
    schema_n_bins: int = 10

    @property
    def has_proxy(self) -> bool:
        return self.proxy_column is not None

    def resolved_text(self) -> str:
        """The full config in the flat grammar, defaults expanded."""
        lines = ["# fairsynth resolved config"]

        def emit(key, value):
            lines.append(f"{key} = {json.dumps(value)}")

        emit("data.path", self.data_path)
        if self.schema_preset:
            emit("schema.preset", self.schema_preset)
            emit("schema.protected", self.schema_protected)
            emit("schema.n_bins", self.schema_n_bins)
        else:
            emit("schema.columns", self.schema.to_dict()["columns"])
        emit("train.fairness_weight", self.train.fairness_weight)
        emit("train.epochs", self.train.epochs)
        emit("train.batch_size", self.train.batch_size)
        emit("train.learning_rate", self.train.learning_rate)
        emit("train.hidden_dim", self.train.hidden_dim)
        emit("train.min_group_count", self.train.min_group_count)
        emit("audit.holdout_fraction", self.holdout_fraction)
        emit("audit.reps", self.reps)
        if self.has_proxy:
            emit("proxy.column", self.proxy_column)
            emit("proxy.reference_value", self.proxy_reference_value)
            emit("proxy.probability", self.proxy_probability)
        emit("sweep.fairness_weights", self.sweep_fairness_weights)
        emit("sweep.seeds", self.sweep_seeds)
        emit("output.dir", self.output_dir)
        emit("seed", self.seed)
        return "\n".join(lines) + "\n"


def _expect(values, key, types, default=None):
    value = values.get(key, default)
    if value is None:
        return None
    if not isinstance(value, types):
        raise ValidationError(f"config key {key}: unexpected type {type(value).__name__}")
    return value


def load_experiment_config(path) -> ExperimentConfig:
    """Load and validate a config file into an ExperimentConfig."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    values = parse_flat_config(text)
    unknown = set(values) - _KNOWN_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    data_path = _expect(values, "data.path", str)
    if not data_path:
        raise ValidationError("config needs data.path")

    preset = _expect(values, "schema.preset", str)
    n_bins = int(_expect(values, "schema.n_bins", (int,), 10))
    protected = _expect(values, "schema.protected", list, ["sex"])
    if preset is not None:
        if preset != "adult":
            raise ValidationError(f"unknown schema preset {preset!r}")
        schema = adult_schema(protected=tuple(protected), n_bins=n_bins)
    elif "schema.columns" in values:
        schema = Schema.from_dict({"columns": values["schema.columns"]})
    else:
        raise ValidationError("config needs schema.preset or schema.columns")

    train = TrainConfig(
        fairness_weight=float(_expect(values, "train.fairness_weight", (int, float), 0.0)),
        epochs=int(_expect(values, "train.epochs", (int,), 50)),
        batch_size=int(_expect(values, "train.batch_size", (int,), 512)),
        learning_rate=float(_expect(values, "train.learning_rate", (int, float), 1e-3)),
        hidden_dim=int(_expect(values, "train.hidden_dim", (int,), 32)),
        min_group_count=int(_expect(values, "train.min_group_count", (int,), 8)),
        seed=int(_expect(values, "seed", (int,), 0)),
    )

    proxy_column = _expect(values, "proxy.column", str)
    if proxy_column is not None and "proxy.reference_value" not in values:
        raise ValidationError("proxy.column requires proxy.reference_value")

    holdout_fraction = float(_expect(values, "audit.holdout_fraction", (int, float), 0.2))
    if not 0.0 < holdout_fraction < 1.0:
        raise ValidationError("audit.holdout_fraction must be in (0, 1)")

    cfg = ExperimentConfig(
        data_path=data_path,
        schema=schema,
        train=train,
        holdout_fraction=holdout_fraction,
        reps=int(_expect(values, "audit.reps", (int,), 5)),
        proxy_column=proxy_column,
        proxy_reference_value=_expect(values, "proxy.reference_value", str),
        proxy_probability=float(_expect(values, "proxy.probability", (int, float), 0.9)),
        sweep_fairness_weights=[
            float(x) for x in _expect(values, "sweep.fairness_weights", list, [0.0, 0.3, 1.0])
        ],
        sweep_seeds=[int(x) for x in _expect(values, "sweep.seeds", list, [1, 2, 3, 4, 5])],
        output_dir=_expect(values, "output.dir", str, "out"),
        seed=int(_expect(values, "seed", (int,), 0)),
        schema_preset=preset,
        schema_protected=list(protected),
        schema_n_bins=n_bins,
    )
    if cfg.reps < 1:
        raise ValidationError("audit.reps must be >= 1")
    return cfg
