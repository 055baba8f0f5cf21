"""Fair synthetic tabular data: generation, measurement, downstream audits."""

from .adult import adult_schema, surrogate_adult
from .audit import (
    AuditReport,
    LogRegConfig,
    LogRegModel,
    audit,
    auc_score,
    evaluate,
    fit_logreg,
    propensity_audit,
    split_holdout,
)
from .data import (
    Dataset,
    EncodedDataset,
    Encoder,
    decode,
    encode,
    fit_encoder,
    inject_proxy,
    load_csv,
)
from .errors import FairsynthError, NumericError, ValidationError
from .fairness import (
    GroupRates,
    disparate_impact,
    fairness_report,
    group_positive_rates,
    parity_difference,
)
from .fidelity import FidelityReport, cramers_v, fidelity_report, tv_distance
from .model import (
    GenerativeModel,
    TrainConfig,
    TrainHistory,
    accuracy_loss,
    conditional_target_probs,
    fairness_loss,
    init_model,
    load_model,
    sample,
    save_model,
    train,
)
from .schema import ColumnSpec, Schema

__version__ = "0.1.0"

__all__ = [
    "AuditReport", "ColumnSpec", "Dataset", "EncodedDataset", "Encoder",
    "FairsynthError", "FidelityReport", "GenerativeModel", "GroupRates",
    "LogRegConfig", "LogRegModel", "NumericError", "Schema", "TrainConfig",
    "TrainHistory", "ValidationError", "accuracy_loss", "adult_schema",
    "audit", "auc_score", "conditional_target_probs", "cramers_v", "decode",
    "disparate_impact", "encode", "evaluate", "fairness_loss",
    "fairness_report", "fidelity_report", "fit_encoder", "fit_logreg",
    "group_positive_rates", "init_model", "inject_proxy", "load_csv",
    "load_model", "parity_difference", "propensity_audit", "sample",
    "save_model", "split_holdout", "surrogate_adult", "train", "tv_distance",
    "__version__",
]
