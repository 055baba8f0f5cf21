"""Autoregressive tabular generator trained on accuracy plus parity loss.

One softmax head per column, chained in the schema's generation order:
the head for column j conditions on the one-hot concatenation of all
previously generated columns (teacher-forced on real rows during
training). The training objective is

    combined = accuracy + fairness_weight * parity_penalty

where accuracy is the mean negative log-likelihood over rows and columns
and the parity penalty is the mean squared pairwise difference between
protected-group means of the model's positive-class conditional. With
fairness_weight = 0 the trainer never touches group structure and reduces
to a purely representative synthesizer.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .data import EncodedDataset, Encoder
from .errors import NumericError, ValidationError
from .nn import (
    DenseHead,
    OptimizerState,
    ZeroInputHead,
    adam_step,
    check_finite,
    dense_backward,
    dense_forward_cached,
    init_dense_head,
    log_softmax,
    softmax,
)
from .rng import derive_seed, make_rng
from .schema import Schema

MODEL_FORMAT = "fairsynth-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; fairness_weight = 0 disables the parity term."""

    fairness_weight: float = 0.0
    epochs: int = 50
    batch_size: int = 512
    learning_rate: float = 1e-3
    hidden_dim: int = 32
    seed: int = 0
    min_group_count: int = 8

    def __post_init__(self):
        if self.fairness_weight < 0:
            raise ValidationError("fairness_weight must be >= 0")
        for name in ("epochs", "batch_size", "hidden_dim", "min_group_count"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")


@dataclass
class TrainHistory:
    """Per-epoch loss components.

    ``fairness_loss`` entries are 0.0 when fairness_weight == 0 (the parity
    term is then never evaluated, so that training is independent of group
    structure). ``skipped_groups`` counts per-epoch batch groups dropped
    for falling under min_group_count. Wall-clock is informational and
    excluded from equality comparisons.
    """

    accuracy_loss: list = field(default_factory=list)
    fairness_loss: list = field(default_factory=list)
    combined_loss: list = field(default_factory=list)
    skipped_groups: list = field(default_factory=list)
    wall_clock: list = field(default_factory=list, compare=False)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,accuracy_loss,fairness_loss,combined_loss,skipped_groups\n")
            for i in range(len(self.accuracy_loss)):
                fh.write(
                    f"{i},{self.accuracy_loss[i]!r},{self.fairness_loss[i]!r},"
                    f"{self.combined_loss[i]!r},{self.skipped_groups[i]}\n"
                )


@dataclass
class GenerativeModel:
    """Per-column heads in generation order, plus the fitted encoder/schema."""

    schema: Schema
    encoder: Encoder
    heads: list
    hidden_dim: int

    @property
    def gen_columns(self) -> list[str]:
        return [self.schema.columns[i].name for i in self.schema.generation_order]

    @property
    def gen_cardinalities(self) -> list[int]:
        return [self.encoder.cardinality(n) for n in self.gen_columns]

    @property
    def offsets(self) -> np.ndarray:
        """Start offset of each generation-order column in the one-hot layout."""
        return np.concatenate([[0], np.cumsum(self.gen_cardinalities)])

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for head in self.heads:
            out.extend(head.params)
        return out

    def target_positive_code(self) -> int:
        spec = self.schema.target
        cats = self.encoder.categories[spec.name]
        if spec.positive_class not in cats:
            raise ValidationError(
                f"positive class {spec.positive_class!r} not among target categories"
            )
        return cats.index(spec.positive_class)


def init_model(enc: Encoder, schema: Schema, cfg: TrainConfig) -> GenerativeModel:
    """Seeded model with one head per column in generation order."""
    rng = make_rng(derive_seed(cfg.seed, "init"))
    names = [schema.columns[i].name for i in schema.generation_order]
    ks = [enc.cardinality(n) for n in names]
    heads = [ZeroInputHead(logits=np.zeros(ks[0]))]
    d_in = ks[0]
    for k in ks[1:]:
        heads.append(init_dense_head(d_in, cfg.hidden_dim, k, rng))
        d_in += k
    return GenerativeModel(schema=schema, encoder=enc, heads=heads, hidden_dim=cfg.hidden_dim)


def gen_order_codes(data: EncodedDataset) -> np.ndarray:
    """Codes reordered to the schema's generation order."""
    return data.codes[:, list(data.schema.generation_order)]


def one_hot_block(codes: np.ndarray, cardinalities) -> np.ndarray:
    """One-hot concatenation of all columns: (n, sum(cardinalities))."""
    n = codes.shape[0]
    x = np.zeros((n, int(sum(cardinalities))))
    rows = np.arange(n)
    off = 0
    for j, k in enumerate(cardinalities):
        x[rows, off + codes[:, j]] = 1.0
        off += k
    return x


def group_assignment(data: EncodedDataset) -> tuple[np.ndarray, list[tuple]]:
    """Joint protected-group index per row over ALL protected columns.

    Returns (ids, keys): ids[i] indexes into keys, the Cartesian product of
    protected category labels in schema order. Rows with a missing value in
    any protected column get id -1 and never contribute to parity terms.
    """
    prot = data.schema.protected
    if not prot:
        raise ValidationError("schema has no protected columns")
    names = [c.name for c in prot]
    cards, missing_codes, code_cols = [], [], []
    for name in names:
        cats = data.encoder.categories[name]
        cards.append(len(cats))
        missing_codes.append(cats.index("?") if "?" in cats else -1)
        code_cols.append(data.column_codes(name))
    ids = np.zeros(data.n_rows, dtype=np.int64)
    excluded = np.zeros(data.n_rows, dtype=bool)
    for col, card, miss in zip(code_cols, cards, missing_codes):
        ids = ids * card + col
        if miss >= 0:
            excluded |= col == miss
    ids[excluded] = -1
    keys = []
    from itertools import product

    for combo in product(*[data.encoder.categories[n] for n in names]):
        keys.append(tuple(zip(names, combo)))
    return ids, keys


def _nll_batch(head, x, codes_col, scale):
    """Per-head NLL sum and d(loss)/d(logits) under teacher forcing.

    scale multiplies the gradient (1/(batch*n_cols) for the mean-NLL loss).
    Returns (nll_sum, dlogits, cache); cache is None for a ZeroInputHead.
    """
    n = codes_col.shape[0]
    rows = np.arange(n)
    if isinstance(head, ZeroInputHead):
        logp = log_softmax(head.logits)
        nll = -logp[codes_col].sum()
        probs = np.exp(logp)
        dlogits = probs[None, :].repeat(n, axis=0)
        dlogits[rows, codes_col] -= 1.0
        return nll, dlogits * scale, None
    logp, cache = dense_forward_cached(head, x)
    nll = -logp[rows, codes_col].sum()
    dlogits = cache[2].copy()
    dlogits[rows, codes_col] -= 1.0
    return nll, dlogits * scale, cache


def _parity_terms(p_pos, group_ids, min_group_count):
    """Parity loss over batch group means plus d(loss)/d(p_pos).

    loss = sum over unordered active-group pairs of (mu_a - mu_b)^2,
    divided by the number of pairs; active = count >= min_group_count.
    Returns (loss, dloss_dp, n_skipped_groups).
    """
    valid = group_ids >= 0
    dp = np.zeros_like(p_pos)
    if not valid.any():
        return 0.0, dp, 0
    gid = group_ids[valid]
    n_groups = int(gid.max()) + 1
    counts = np.bincount(gid, minlength=n_groups)
    active = counts >= min_group_count
    n_active = int(active.sum())
    n_skipped = int((counts > 0).sum() - n_active)
    if n_active < 2:
        return 0.0, dp, n_skipped
    sums = np.bincount(gid, weights=p_pos[valid], minlength=n_groups)
    mu = np.zeros(n_groups)
    mu[active] = sums[active] / counts[active]
    mu_act = mu[active]
    n_pairs = n_active * (n_active - 1) // 2
    loss = (n_active * (mu_act**2).sum() - mu_act.sum() ** 2) / n_pairs
    # d loss / d mu_g = 2 (A*mu_g - sum(mu)) / n_pairs for active g
    dmu = np.zeros(n_groups)
    dmu[active] = 2.0 * (n_active * mu_act - mu_act.sum()) / n_pairs
    per_row = np.zeros(n_groups)
    per_row[active] = dmu[active] / counts[active]
    contrib = np.zeros_like(p_pos)
    contrib[valid] = np.where(active[gid], per_row[gid], 0.0)
    return float(loss), contrib, n_skipped


def accuracy_loss(model: GenerativeModel, batch: EncodedDataset) -> float:
    """Mean over rows and columns of -log p(column | predecessors)."""
    codes = gen_order_codes(batch)
    if codes.shape[0] == 0:
        raise ValidationError("empty batch")
    ks = model.gen_cardinalities
    x = one_hot_block(codes, ks)
    offsets = model.offsets
    n, m = codes.shape
    rows = np.arange(n)
    total = 0.0
    for j, head in enumerate(model.heads):
        if isinstance(head, ZeroInputHead):
            logp = log_softmax(head.logits)
            total -= logp[codes[:, j]].sum()
        else:
            logp, _ = dense_forward_cached(head, x[:, : offsets[j]])
            total -= logp[rows, codes[:, j]].sum()
    return float(total / (n * m))


def conditional_target_probs(model: GenerativeModel, rows: EncodedDataset) -> np.ndarray:
    """Model probability of the positive target class given all other cells."""
    codes = gen_order_codes(rows)
    ks = model.gen_cardinalities
    x = one_hot_block(codes, ks)
    head = model.heads[-1]
    pos = model.target_positive_code()
    if isinstance(head, ZeroInputHead):
        return np.full(codes.shape[0], softmax(head.logits)[pos])
    logp, _ = dense_forward_cached(head, x[:, : model.offsets[-2]])
    return np.exp(logp[:, pos])


def fairness_loss(
    model: GenerativeModel,
    batch: EncodedDataset,
    groups: np.ndarray,
    cfg: TrainConfig,
) -> float:
    """Mean squared pairwise difference between group means of the target conditional."""
    p_pos = conditional_target_probs(model, batch)
    loss, _, _ = _parity_terms(p_pos, np.asarray(groups), cfg.min_group_count)
    return loss


def nll_loss_and_grads(model: GenerativeModel, codes: np.ndarray, x: np.ndarray):
    """(accuracy loss, parameter gradients) for one teacher-forced batch."""
    acc, _, grads, _ = combined_loss_and_grads(model, codes, x, None, TrainConfig())
    return acc, grads


def fairness_loss_and_grads(
    model: GenerativeModel,
    codes: np.ndarray,
    x: np.ndarray,
    group_ids: np.ndarray,
    cfg: TrainConfig,
):
    """(parity loss, parameter gradients) of the fairness term alone.

    Only the target head receives gradient; teacher-forced prefixes make
    the parity term independent of every other head's parameters.
    """
    head = model.heads[-1]
    pos = model.target_positive_code()
    n = codes.shape[0]
    if isinstance(head, ZeroInputHead):
        probs = softmax(head.logits)[None, :].repeat(n, 0)
        cache = None
    else:
        _, cache = dense_forward_cached(head, x[:, : model.offsets[-2]])
        probs = cache[2]
    p_pos = probs[:, pos]
    loss, dp, _ = _parity_terms(p_pos, np.asarray(group_ids), cfg.min_group_count)
    dz = (-probs) * (dp * p_pos)[:, None]
    dz[:, pos] += dp * p_pos
    grads = []
    for other in model.heads[:-1]:
        grads.extend(np.zeros_like(p) for p in other.params)
    if isinstance(head, ZeroInputHead):
        grads.append(dz.sum(axis=0))
    else:
        grads.extend(dense_backward(head, cache, dz))
    return float(loss), grads


def combined_loss_and_grads(
    model: GenerativeModel,
    codes: np.ndarray,
    x: np.ndarray,
    group_ids,
    cfg: TrainConfig,
):
    """Loss components and parameter gradients for one teacher-forced batch.

    codes/x are generation-order codes and their one-hot block. group_ids
    may be None when the parity term is off. Returns
    (acc_loss, fair_loss, grads, skipped_groups) with grads aligned to
    ``model.params``.
    """
    n, m = codes.shape
    offsets = model.offsets
    scale = 1.0 / (n * m)
    lam = cfg.fairness_weight
    grads = []
    nll_total = 0.0
    fair_loss = 0.0
    skipped = 0
    for j, head in enumerate(model.heads):
        xj = None if isinstance(head, ZeroInputHead) else x[:, : offsets[j]]
        nll, dlogits, cache = _nll_batch(head, xj, codes[:, j], scale)
        nll_total += nll
        if j == m - 1 and lam > 0 and group_ids is not None:
            probs = np.exp(log_softmax(head.logits))[None, :].repeat(n, 0) if cache is None else cache[2]
            pos = model.target_positive_code()
            p_pos = probs[:, pos]
            fair_loss, dp, skipped = _parity_terms(p_pos, group_ids, cfg.min_group_count)
            # dp -> logits through the softmax row: dz_k = dp * p_pos * (1[k=pos] - p_k)
            dz = (-probs) * (dp * p_pos)[:, None]
            dz[:, pos] += dp * p_pos
            dlogits = dlogits + lam * dz
        if isinstance(head, ZeroInputHead):
            grads.append(dlogits.sum(axis=0))
        else:
            grads.extend(dense_backward(head, cache, dlogits))
    acc_loss = float(nll_total * scale)
    if not np.isfinite(acc_loss) or not np.isfinite(fair_loss):
        raise NumericError("non-finite loss")
    return acc_loss, float(fair_loss), grads, skipped


def _warm_start_marginals(model: GenerativeModel, codes: np.ndarray) -> None:
    """Set each head's output bias to the column's smoothed log-marginals.

    Rare categories sit many nats below a uniform start, further than the
    optimizer can travel within the default budget; starting every head at
    the marginal distribution leaves training only the conditional
    structure to learn. Deterministic, and independent of group structure.
    Applies only to freshly initialized heads (output biases still zero),
    so continuing training on a fitted model never resets it.
    """
    ks = model.gen_cardinalities
    for j, head in enumerate(model.heads):
        bias = head.logits if isinstance(head, ZeroInputHead) else head.b2
        if bias.any():
            continue
        counts = np.bincount(codes[:, j], minlength=ks[j]).astype(float) + 1.0
        log_freq = np.log(counts / counts.sum())
        bias[:] = log_freq - log_freq.mean()


def train(
    model: GenerativeModel, data: EncodedDataset, cfg: TrainConfig
) -> tuple[GenerativeModel, TrainHistory]:
    """Minibatch optimization of the combined loss; deterministic per config.

    Starts from the warm-started marginals, shuffles with a seeded
    generator, and records the accuracy and parity components separately.
    Divergence (non-finite loss or parameters) aborts with the epoch/batch
    index.
    """
    codes = gen_order_codes(data)
    n = codes.shape[0]
    if n == 0:
        raise ValidationError("cannot train on an empty dataset")
    _warm_start_marginals(model, codes)
    x_full = one_hot_block(codes, model.gen_cardinalities)
    group_ids = None
    if cfg.fairness_weight > 0:
        group_ids, _ = group_assignment(data)
    params = model.params
    opt = OptimizerState.for_params(params, cfg.learning_rate)
    rng = make_rng(derive_seed(cfg.seed, "fit"))
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        perm = rng.permutation(n)
        nll_sum = 0.0
        fair_sum = 0.0
        n_batches = 0
        skipped_total = 0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            try:
                acc, fair, grads, skipped = combined_loss_and_grads(
                    model, codes[idx], x_full[idx],
                    None if group_ids is None else group_ids[idx], cfg
                )
                adam_step(params, grads, opt)
                check_finite(params, f"epoch {epoch}, batch {n_batches}")
            except NumericError as exc:
                raise NumericError(f"epoch {epoch}, batch {n_batches}: {exc}") from None
            nll_sum += acc * len(idx)
            fair_sum += fair
            skipped_total += skipped
            n_batches += 1
        epoch_acc = nll_sum / n
        epoch_fair = fair_sum / n_batches
        history.accuracy_loss.append(float(epoch_acc))
        history.fairness_loss.append(float(epoch_fair))
        history.combined_loss.append(float(epoch_acc + cfg.fairness_weight * epoch_fair))
        history.skipped_groups.append(skipped_total)
        history.wall_clock.append(time.perf_counter() - t0)
    return model, history


def sample(model: GenerativeModel, n: int, seed: int) -> EncodedDataset:
    """Ancestral sampling of n rows, deterministic per seed.

    Columns are drawn in generation order from each head's probabilities
    given the already-sampled one-hot prefix; the returned codes are in
    schema column order.
    """
    if n < 0:
        raise ValidationError("sample size must be >= 0")
    rng = make_rng(derive_seed(seed, "sample"))
    ks = model.gen_cardinalities
    offsets = model.offsets
    total = int(offsets[-1])
    x = np.zeros((n, total))
    codes_gen = np.zeros((n, len(ks)), dtype=np.int64)
    rows = np.arange(n)
    for j, head in enumerate(model.heads):
        if isinstance(head, ZeroInputHead):
            probs = np.broadcast_to(softmax(head.logits), (n, ks[j]))
        else:
            logp, _ = dense_forward_cached(head, x[:, : offsets[j]])
            probs = np.exp(logp)
        u = rng.random(n)
        cum = probs.cumsum(axis=1)
        idx = np.minimum((cum < u[:, None]).sum(axis=1), ks[j] - 1)
        codes_gen[:, j] = idx
        x[rows, offsets[j] + idx] = 1.0
    codes = np.zeros_like(codes_gen)
    codes[:, list(model.schema.generation_order)] = codes_gen
    return EncodedDataset(schema=model.schema, encoder=model.encoder, codes=codes)


def _array_to_dict(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype=np.float64)
    return {
        "shape": list(a.shape),
        "dtype": "float64-le",
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _array_from_dict(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(d["shape"]).copy()


def save_model(model: GenerativeModel, path) -> None:
    """Versioned JSON model file embedding schema and encoder.

    Arrays are base64-encoded little-endian float64 and round-trip
    bit-exactly; the header documents the field order.
    """
    heads = []
    for head in model.heads:
        if isinstance(head, ZeroInputHead):
            heads.append({"kind": "zero_input", "logits": _array_to_dict(head.logits)})
        else:
            heads.append(
                {
                    "kind": "dense",
                    "w1": _array_to_dict(head.w1),
                    "b1": _array_to_dict(head.b1),
                    "w2": _array_to_dict(head.w2),
                    "b2": _array_to_dict(head.b2),
                }
            )
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "field_order": ["format", "version", "field_order", "hidden_dim", "schema",
                        "encoder", "heads"],
        "hidden_dim": model.hidden_dim,
        "schema": model.schema.to_dict(),
        "encoder": model.encoder.to_dict(),
        "heads": heads,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> GenerativeModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read model file {path}: {exc}") from None
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ValidationError(f"{path}: unsupported model version {doc.get('version')!r}")
    schema = Schema.from_dict(doc["schema"])
    encoder = Encoder.from_dict(schema, doc["encoder"])
    heads = []
    for item in doc["heads"]:
        if item["kind"] == "zero_input":
            heads.append(ZeroInputHead(logits=_array_from_dict(item["logits"])))
        else:
            heads.append(
                DenseHead(
                    w1=_array_from_dict(item["w1"]),
                    b1=_array_from_dict(item["b1"]),
                    w2=_array_from_dict(item["w2"]),
                    b2=_array_from_dict(item["b2"]),
                )
            )
    return GenerativeModel(
        schema=schema, encoder=encoder, heads=heads, hidden_dim=int(doc["hidden_dim"])
    )
