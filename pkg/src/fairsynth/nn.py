"""Dense-head numeric kernel: forward pass, exact backprop, Adam, grad check.

Two head types cover every model in the package: a softmax readout over a
single tanh hidden layer (``DenseHead``) and a bare logit vector for
columns with no predecessors (``ZeroInputHead``). Gradients are exact
reverse-mode for this fixed architecture, verified against central finite
differences by :func:`grad_check`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ValidationError


@dataclass
class ZeroInputHead:
    logits: np.ndarray  # (k,)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.logits]


@dataclass
class DenseHead:
    w1: np.ndarray  # (h, d_in)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (k, h)
    b2: np.ndarray  # (k,)

    @property
    def d_in(self) -> int:
        return self.w1.shape[1]

    @property
    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]


def init_dense_head(d_in: int, hidden: int, k: int, rng: np.random.Generator) -> DenseHead:
    """Seeded uniform init in [-s, s] with s = sqrt(6 / (fan_in + fan_out))."""
    s1 = np.sqrt(6.0 / (d_in + hidden))
    s2 = np.sqrt(6.0 / (hidden + k))
    return DenseHead(
        w1=rng.uniform(-s1, s1, size=(hidden, d_in)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-s2, s2, size=(k, hidden)),
        b2=np.zeros(k),
    )


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted log-softmax along the last axis."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def head_forward(head, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one input vector or a batch.

    ``softmax(w2 @ tanh(w1 @ x + b1) + b2)`` for a DenseHead; the softmax
    of the stored logits (broadcast over the batch) for a ZeroInputHead.
    """
    if isinstance(head, ZeroInputHead):
        probs = softmax(head.logits)
        if x is not None and np.ndim(x) == 2:
            return np.broadcast_to(probs, (x.shape[0], probs.shape[0])).copy()
        return probs
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != head.d_in:
        raise ValidationError(f"input dim {x.shape[1]} != head dim {head.d_in}")
    if not np.isfinite(x).all():
        raise ValidationError("non-finite input to head_forward")
    hidden = np.tanh(x @ head.w1.T + head.b1)
    probs = softmax(hidden @ head.w2.T + head.b2)
    return probs[0] if single else probs


def dense_forward_cached(head: DenseHead, x: np.ndarray):
    """Batch forward returning (log_probs, cache) for a later backward."""
    hidden = np.tanh(x @ head.w1.T + head.b1)
    logp = log_softmax(hidden @ head.w2.T + head.b2)
    return logp, (x, hidden, np.exp(logp))


def dense_backward(head: DenseHead, cache, dlogits: np.ndarray) -> list[np.ndarray]:
    """Gradients [dw1, db1, dw2, db2] given d(loss)/d(logits).

    Inputs are treated as constants (teacher forcing), so no gradient is
    propagated to x.
    """
    x, hidden, _ = cache
    dw2 = dlogits.T @ hidden
    db2 = dlogits.sum(axis=0)
    dhidden = dlogits @ head.w2
    dz1 = dhidden * (1.0 - hidden * hidden)
    dw1 = dz1.T @ x
    db1 = dz1.sum(axis=0)
    return [dw1, db1, dw2, db2]


@dataclass
class OptimizerState:
    """Adam accumulators mirroring one flat list of parameter arrays."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], learning_rate: float = 1e-3) -> "OptimizerState":
        return cls(
            learning_rate=learning_rate,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: OptimizerState) -> None:
    """One bias-corrected adaptive-moment update, in place and deterministic."""
    if len(params) != len(state.m):
        raise ValidationError("optimizer state does not match parameter list")
    for g in grads:
        if not np.isfinite(g).all():
            raise NumericError("non-finite gradient in adam_step")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)


@dataclass
class GradCheckReport:
    passed: bool
    worst_rel_err: float
    worst_param: int
    worst_coord: tuple
    analytic: float
    numeric: float

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return (
            f"grad_check {status}: worst rel err {self.worst_rel_err:.3e} at "
            f"param {self.worst_param} coord {self.worst_coord} "
            f"(analytic {self.analytic:.6e}, numeric {self.numeric:.6e})"
        )


def grad_check(loss_and_grad_fn, params: list[np.ndarray], h: float = 1e-4,
               tol: float = 1e-4) -> GradCheckReport:
    """Central finite differences per coordinate vs analytic gradients.

    ``loss_and_grad_fn(params) -> (loss, grads)``. Relative error is
    ``|a - n| / max(1e-8, |a| + |n|)``; the report names the worst
    coordinate.
    """
    _, grads = loss_and_grad_fn(params)
    worst = GradCheckReport(True, 0.0, -1, (), 0.0, 0.0)
    for pi, p in enumerate(params):
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            lo_plus, _ = loss_and_grad_fn(params)
            p[idx] = orig - h
            lo_minus, _ = loss_and_grad_fn(params)
            p[idx] = orig
            numeric = (lo_plus - lo_minus) / (2.0 * h)
            analytic = grads[pi][idx]
            rel = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
            if rel > worst.worst_rel_err:
                worst = GradCheckReport(
                    rel <= tol, rel, pi, idx, float(analytic), float(numeric)
                )
            it.iternext()
    if worst.worst_param == -1:
        return GradCheckReport(True, 0.0, -1, (), 0.0, 0.0)
    worst.passed = worst.worst_rel_err <= tol
    return worst


def check_finite(arrays, context: str) -> None:
    """Raise NumericError if any array holds NaN/Inf (post-update guard)."""
    for a in arrays:
        if not np.isfinite(a).all():
            raise NumericError(f"non-finite parameter detected: {context}")
