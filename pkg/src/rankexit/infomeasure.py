"""Information measures: time-averaged and mixed information, plus exact oracles.

Monte Carlo estimators work on a :class:`SampleBatch` (or any sequence of
:class:`SampleRecord`) and report an :class:`Estimate` whose standard error
comes from the per-sample variance of the averaged summand. They only use the
posterior vectors, never the true symbols, so they run blind.

The ``exact_*`` functions evaluate the same quantities by direct summation on
a small :class:`DiscreteJoint`, where Z is the ranked list of P(x | y).

All quantities are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import entr, xlogy

from .messages import rank_retain

EPS = 1e-12
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n: int

    @classmethod
    def from_terms(cls, terms) -> "Estimate":
        terms = np.asarray(terms, dtype=float)
        n = terms.size
        if n < 1:
            raise ValueError("cannot estimate from an empty sample")
        se = float(np.std(terms, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(np.mean(terms)), se, n)

    @classmethod
    def merge(cls, parts: Sequence["Estimate"]) -> "Estimate":
        """Combine estimates from disjoint chunks: n-weighted mean.

        The standard error assumes independent chunks; it ignores the spread
        between chunk means, which is negligible for chunks of the same law.
        """
        n = sum(p.n for p in parts)
        value = sum(p.n * p.value for p in parts) / n
        se = math.sqrt(sum((p.n * p.std_error) ** 2 for p in parts)) / n
        return cls(value, se, n)

    def __iter__(self):
        return iter((self.value, self.std_error))


@dataclass
class SampleRecord:
    """One pass through the measurement chain."""

    x: int
    posterior: np.ndarray
    rank: np.ndarray | None = None
    post_processed: np.ndarray | None = None

    def __post_init__(self):
        self.posterior = np.asarray(self.posterior, dtype=float)
        if self.rank is None:
            self.rank = rank_retain(self.posterior)


@dataclass
class SampleBatch:
    """Column-wise stack of samples: ``x`` (n,), ``posterior``/``rank``/``post_processed`` (n, q)."""

    x: np.ndarray | None
    posterior: np.ndarray
    rank: np.ndarray | None = None
    post_processed: np.ndarray | None = None

    def __post_init__(self):
        self.posterior = np.atleast_2d(np.asarray(self.posterior, dtype=float))
        if self.rank is None:
            self.rank = rank_retain(self.posterior)
        if self.post_processed is not None:
            self.post_processed = np.atleast_2d(np.asarray(self.post_processed, dtype=float))

    def __len__(self):
        return self.posterior.shape[0]

    @property
    def q(self) -> int:
        return self.posterior.shape[1]

    @classmethod
    def from_records(cls, records: Sequence[SampleRecord]) -> "SampleBatch":
        records = list(records)
        if not records:
            raise ValueError("empty sample set")
        pp = [r.post_processed for r in records]
        return cls(
            x=np.array([r.x for r in records]),
            posterior=np.stack([r.posterior for r in records]),
            rank=np.stack([r.rank for r in records]),
            post_processed=None if any(p is None for p in pp) else np.stack(pp),
        )


def as_batch(samples) -> SampleBatch:
    if isinstance(samples, SampleBatch):
        return samples
    return SampleBatch.from_records(samples)


def entropy(p) -> np.ndarray | float:
    """Shannon entropy in bits along the last axis, with 0 log 0 = 0."""
    h = entr(np.asarray(p, dtype=float)).sum(axis=-1) / LN2
    return float(h) if np.ndim(h) == 0 else h


# Per-sample summands. Their means are the estimates.


def entropy_terms(posterior, h_x: float) -> np.ndarray:
    return h_x - entropy(posterior)


def mixed_terms(posterior, post_processed, h_x: float, eps: float = EPS) -> np.ndarray:
    qf = np.maximum(np.asarray(post_processed, dtype=float), eps)
    return h_x + np.sum(np.asarray(posterior) * np.log2(qf), axis=-1)


def divergence_terms(posterior, post_processed, eps: float = EPS) -> np.ndarray:
    p = np.asarray(posterior, dtype=float)
    qf = np.maximum(np.asarray(post_processed, dtype=float), eps)
    return (xlogy(p, p).sum(axis=-1) - np.sum(p * np.log(qf), axis=-1)) / LN2


def _h_x(batch: SampleBatch, h_x: float | None) -> float:
    return math.log2(batch.q) if h_x is None else h_x


def mi_time_average(samples, h_x: float | None = None) -> Estimate:
    """I(X;Y) as H(X) minus the time average of H(P_{X|Y=y_i}).

    Valid only if the posteriors are true Bayesian posteriors. ``h_x``
    defaults to log2(q), the entropy of the uniform source.
    """
    b = as_batch(samples)
    return Estimate.from_terms(entropy_terms(b.posterior, _h_x(b, h_x)))


def _require_pp(b: SampleBatch) -> np.ndarray:
    if b.post_processed is None:
        raise ValueError("samples carry no post-processed messages")
    return b.post_processed


def mixed_info(samples, h_x: float | None = None, eps: float = EPS) -> Estimate:
    """Mixed information: H(X) + avg_i sum_x P_i(x) log2 Q_i(x).

    Q is floored at ``eps`` inside the logarithm so that the estimate stays
    finite; the result is a lower bound on both I(X;Y) and I(X;Z).
    """
    b = as_batch(samples)
    return Estimate.from_terms(mixed_terms(b.posterior, _require_pp(b), _h_x(b, h_x), eps))


def expected_divergence(samples, eps: float = EPS) -> Estimate:
    """Time average of D(P_{X|Y} || Q_{X|Z}), the gap between the two estimators above."""
    b = as_batch(samples)
    return Estimate.from_terms(divergence_terms(b.posterior, _require_pp(b), eps))


# Exact evaluation on small discrete instances.


@dataclass
class DiscreteJoint:
    """Joint P(x, y) of a small discrete channel, optionally with Z = z(y).

    ``z_ranks[y]`` is the ranked list observed when Y = y, making Z a
    deterministic function of Y (so X - Y - Z is a Markov chain).
    """

    p_xy: np.ndarray
    z_ranks: np.ndarray | None = None

    def __post_init__(self):
        self.p_xy = np.asarray(self.p_xy, dtype=float)
        if self.p_xy.ndim != 2 or np.any(self.p_xy < 0) or abs(self.p_xy.sum() - 1.0) > 1e-9:
            raise ValueError("p_xy must be a non-negative matrix summing to one")
        if self.p_xy.size > 10**6:
            raise ValueError("instance too large for exact evaluation")
        if self.z_ranks is not None:
            self.z_ranks = np.asarray(self.z_ranks)
            if self.z_ranks.shape != (self.p_xy.shape[1], self.p_xy.shape[0]):
                raise ValueError("z_ranks must hold one ranked list per y")

    @classmethod
    def from_channel(cls, p_y_given_x, p_x=None) -> "DiscreteJoint":
        """Joint from a transition matrix (rows x) and prior (uniform by default); Z = rank of P(x|y)."""
        w = np.asarray(p_y_given_x, dtype=float)
        p_x = np.full(w.shape[0], 1.0 / w.shape[0]) if p_x is None else np.asarray(p_x, dtype=float)
        return cls.ranked(p_x[:, None] * w)

    @classmethod
    def ranked(cls, p_xy) -> "DiscreteJoint":
        joint = cls(p_xy)
        joint.z_ranks = rank_retain(joint.posterior_given_y().T)
        return joint

    @property
    def q(self) -> int:
        return self.p_xy.shape[0]

    @property
    def p_x(self) -> np.ndarray:
        return self.p_xy.sum(axis=1)

    @property
    def p_y(self) -> np.ndarray:
        return self.p_xy.sum(axis=0)

    def posterior_given_y(self) -> np.ndarray:
        """P(x | y), shape (|X|, |Y|); columns with P(y) = 0 are set uniform."""
        p_y = self.p_y
        out = np.full_like(self.p_xy, 1.0 / self.q)
        nz = p_y > 0
        out[:, nz] = self.p_xy[:, nz] / p_y[nz]
        return out

    def z_labels(self) -> tuple[np.ndarray, np.ndarray]:
        """(distinct ranked lists, label of each y)."""
        if self.z_ranks is None:
            raise ValueError("joint has no deterministic map y -> z")
        ranks, labels = np.unique(self.z_ranks, axis=0, return_inverse=True)
        return ranks, labels.reshape(-1)

    def p_xz(self) -> np.ndarray:
        ranks, labels = self.z_labels()
        out = np.zeros((self.q, len(ranks)))
        np.add.at(out.T, labels, self.p_xy.T)
        return out

    def posterior_given_z(self) -> tuple[np.ndarray, np.ndarray]:
        """(distinct ranked lists, P(x | z) with shape (n_z, |X|))."""
        ranks, _ = self.z_labels()
        p_xz = self.p_xz()
        p_z = p_xz.sum(axis=0)
        out = np.full(p_xz.shape, 1.0 / self.q)
        out[:, p_z > 0] = p_xz[:, p_z > 0] / p_z[p_z > 0]
        return ranks, out.T


def _mi_from_joint(p: np.ndarray) -> float:
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / (px @ py)[nz])))


def exact_mi(joint: DiscreteJoint, pair: str = "XY") -> float:
    """I(X;Y) or I(X;Z) by direct summation."""
    pair = pair.upper()
    if pair == "XY":
        return _mi_from_joint(joint.p_xy)
    if pair == "XZ":
        return _mi_from_joint(joint.p_xz())
    raise ValueError(f"pair must be 'XY' or 'XZ', got {pair!r}")


def _model_table(joint: DiscreteJoint, q_model) -> np.ndarray:
    """Q(x | z(y)) for every y, shape (|Y|, |X|)."""
    if joint.z_ranks is None:
        raise ValueError("role-model audit needs z to be a deterministic function of y")
    if isinstance(q_model, np.ndarray):
        table = q_model
    else:
        table = q_model.apply(joint.z_ranks)
    if table.shape != joint.z_ranks.shape:
        raise ValueError("model output has the wrong shape")
    return table


def _kl_bits(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise D(p || q); +inf where q = 0 < p."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(p > 0, p * np.log(q), 0.0)
    return (xlogy(p, p).sum(axis=-1) - inner.sum(axis=-1)) / LN2


def exact_mixed_info(joint: DiscreteJoint, q_model) -> float:
    """sum_{x,y} P(x,y) log2(Q(x|z(y)) / P(x)), without any floor."""
    table = _model_table(joint, q_model)
    p_x = joint.p_x
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log2(table.T) - np.log2(p_x)[:, None]
        return float(np.sum(np.where(joint.p_xy > 0, joint.p_xy * ratio, 0.0)))


def exact_role_model_audit(joint: DiscreteJoint, q_model) -> dict[str, float]:
    """All four terms of the role-model identity, exactly.

    ``lhs`` = E D(P_{X|Y} || Q_{X|Z}); the identity says
    ``lhs == h_x_given_z - h_x_given_y + residual_divergence`` where the last
    term is E D(P_{X|Z} || Q_{X|Z}).
    """
    table = _model_table(joint, q_model)
    p_y = joint.p_y
    post_y = joint.posterior_given_y().T
    lhs = float(np.sum(p_y * _kl_bits(post_y, table)))
    h_x_given_y = float(np.sum(p_y * entropy(post_y)))

    ranks, labels = joint.z_labels()
    p_z = np.bincount(labels, weights=p_y, minlength=len(ranks))
    _, post_z = joint.posterior_given_z()
    # one representative y per z to read Q(. | z)
    first_y = np.full(len(ranks), -1)
    first_y[labels[::-1]] = np.arange(len(labels))[::-1]
    q_z = table[first_y]
    h_x_given_z = float(np.sum(p_z * entropy(post_z)))
    residual = float(np.sum(p_z * _kl_bits(post_z, q_z)))
    return {
        "lhs": lhs,
        "h_x_given_z": h_x_given_z,
        "h_x_given_y": h_x_given_y,
        "residual_divergence": residual,
    }
