"""Post-processors Q(x | z) for ranked lists and their role-model fits.

Two families are provided:

``RankPositionModel``
    Q(x | z) = theta[position of x in z]; q parameters.
``FullTableModel``
    one free distribution per observed ranked list, plus a fallback for
    lists never seen in training. Only sensible for small q.

Both are fitted in closed form by minimising the empirical expected
divergence avg_i D(P_i || Q(. | z_i)) over training pairs (P_i, z_i), where
P_i is the exact posterior of the superior observation. Since

    D(P_i || Q_i) = -H(P_i) - sum_x P_i(x) log Q_i(x),

only the cross-entropy term depends on Q. For the rank-position family it
equals -sum_r (sum_i P_i(z_i[r])) log theta[r], so with S_r = avg_i P_i(z_i[r])
(which sums to one) Gibbs' inequality gives theta = S as the unique
minimiser. For the full table the same argument applies separately to each
ranked list: Q(. | z) is the average of the posteriors observed with that
list, i.e. the Monte Carlo estimate of sum_y P(x | y) P(y | z).

Fitting is an aggregation of sums, so chunks can be accumulated separately
and merged (see the ``*Accumulator`` classes).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .infomeasure import EPS, as_batch, mixed_info, SampleBatch
from .messages import rank_positions


@dataclass
class RankPositionModel:
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.ndim != 1 or np.any(self.theta < 0) or abs(self.theta.sum() - 1.0) > 1e-9:
            raise ValueError("theta must be a probability vector over positions")

    @property
    def q(self) -> int:
        return self.theta.size

    @classmethod
    def uniform(cls, q: int) -> "RankPositionModel":
        return cls(np.full(q, 1.0 / q))

    def apply(self, z) -> np.ndarray:
        return self.theta[rank_positions(z)]

    def summary(self) -> dict:
        return {"variant": "rank_position", "theta_head": self.theta[:4].tolist()}


@dataclass
class FullTableModel:
    table: dict[tuple[int, ...], np.ndarray]
    fallback: np.ndarray

    def __post_init__(self):
        self.fallback = np.asarray(self.fallback, dtype=float)
        for row in [self.fallback, *self.table.values()]:
            if np.any(row < 0) or abs(row.sum() - 1.0) > 1e-9:
                raise ValueError("stored rows must be probability vectors")

    @property
    def q(self) -> int:
        return self.fallback.size

    def apply(self, z) -> np.ndarray:
        z = np.asarray(z)
        if z.ndim == 1:
            return self.table.get(tuple(int(v) for v in z), self.fallback).copy()
        flat = z.reshape(-1, z.shape[-1])
        keys, inverse = np.unique(flat, axis=0, return_inverse=True)
        rows = np.stack([self.table.get(tuple(int(v) for v in k), self.fallback) for k in keys])
        return rows[inverse.reshape(-1)].reshape(z.shape)

    def summary(self) -> dict:
        return {"variant": "full_table", "entries": len(self.table)}


PostProcessor = Union[RankPositionModel, FullTableModel]


def apply(pp: PostProcessor, z) -> np.ndarray:
    """Q(. | z) for a ranked list or a stack of them."""
    return pp.apply(z)


@dataclass
class RankPositionAccumulator:
    q: int
    sums: np.ndarray = None
    n: int = 0

    def __post_init__(self):
        if self.sums is None:
            self.sums = np.zeros(self.q)

    def update(self, posterior, rank) -> "RankPositionAccumulator":
        posterior = np.atleast_2d(posterior)
        self.sums += np.take_along_axis(posterior, np.atleast_2d(rank), axis=1).sum(axis=0)
        self.n += posterior.shape[0]
        return self

    def merge(self, other: "RankPositionAccumulator") -> "RankPositionAccumulator":
        return RankPositionAccumulator(self.q, self.sums + other.sums, self.n + other.n)

    def model(self) -> RankPositionModel:
        if self.n == 0:
            raise ValueError("cannot fit a post-processor on an empty sample set")
        theta = self.sums / self.n
        return RankPositionModel(theta / theta.sum())


@dataclass
class FullTableAccumulator:
    q: int
    sums: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    total: np.ndarray = None
    n: int = 0

    def __post_init__(self):
        if self.total is None:
            self.total = np.zeros(self.q)

    def update(self, posterior, rank) -> "FullTableAccumulator":
        posterior = np.atleast_2d(posterior)
        keys, inverse = np.unique(np.atleast_2d(rank), axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        group = np.zeros((len(keys), self.q))
        np.add.at(group, inverse, posterior)
        count = np.bincount(inverse, minlength=len(keys))
        for k, s, c in zip(keys, group, count):
            key = tuple(int(v) for v in k)
            if key in self.sums:
                self.sums[key] = self.sums[key] + s
                self.counts[key] += int(c)
            else:
                self.sums[key] = s
                self.counts[key] = int(c)
        self.total = self.total + posterior.sum(axis=0)
        self.n += posterior.shape[0]
        return self

    def merge(self, other: "FullTableAccumulator") -> "FullTableAccumulator":
        out = FullTableAccumulator(self.q, dict(self.sums), dict(self.counts), self.total.copy(), self.n)
        for key, s in other.sums.items():
            out.sums[key] = out.sums[key] + s if key in out.sums else s
            out.counts[key] = out.counts.get(key, 0) + other.counts[key]
        out.total = out.total + other.total
        out.n += other.n
        return out

    def model(self) -> FullTableModel:
        if self.n == 0:
            raise ValueError("cannot fit a post-processor on an empty sample set")
        table = {}
        for key, s in self.sums.items():
            row = s / self.counts[key]
            table[key] = row / row.sum()
        fallback = self.total / self.n
        return FullTableModel(table, fallback / fallback.sum())


FAMILIES = {
    "rank_position": RankPositionAccumulator,
    "full_table": FullTableAccumulator,
}


def accumulator(family: str, q: int):
    try:
        return FAMILIES[family](q)
    except KeyError:
        raise ValueError(f"unknown post-processor family {family!r}") from None


def _fit(samples, family: str) -> PostProcessor:
    b = as_batch(samples)
    if len(b) == 0:
        raise ValueError("cannot fit a post-processor on an empty sample set")
    return accumulator(family, b.q).update(b.posterior, b.rank).model()


def fit_rank_position(samples) -> RankPositionModel:
    """theta[r] = average posterior mass on the symbol ranked r-th."""
    return _fit(samples, "rank_position")


def fit_full_table(samples) -> FullTableModel:
    """Average posterior per distinct ranked list; global average as fallback."""
    return _fit(samples, "full_table")


def fit(samples, family: str = "rank_position") -> PostProcessor:
    return _fit(samples, family)


def with_post_processor(samples, pp: PostProcessor) -> SampleBatch:
    b = as_batch(samples)
    return SampleBatch(b.x, b.posterior, b.rank, pp.apply(b.rank))


def improvement_step_audit(samples, pp_before: PostProcessor, pp_after: PostProcessor, eps: float = EPS) -> dict:
    """Mixed information on ``samples`` before and after a refit."""
    return {
        "mixed_before": mixed_info(with_post_processor(samples, pp_before), eps=eps).value,
        "mixed_after": mixed_info(with_post_processor(samples, pp_after), eps=eps).value,
    }


# Plain-text serialisation: "key=value" header lines, then one row per
# position (rank_position) or per stored list (full_table: "r0 ... | p0 ...").


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def dumps(pp: PostProcessor) -> str:
    out = io.StringIO()
    if isinstance(pp, RankPositionModel):
        out.write(f"variant=rank_position\nq={pp.q}\n")
        for r, t in enumerate(pp.theta):
            out.write(f"{r} {format(float(t), '.17g')}\n")
    elif isinstance(pp, FullTableModel):
        out.write(f"variant=full_table\nq={pp.q}\nentries={len(pp.table)}\n")
        out.write(f"fallback | {_fmt(pp.fallback)}\n")
        for key in sorted(pp.table):
            out.write(f"{' '.join(map(str, key))} | {_fmt(pp.table[key])}\n")
    else:
        raise TypeError(f"not a post-processor: {type(pp).__name__}")
    return out.getvalue()


def loads(text: str) -> PostProcessor:
    header = {}
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line and "|" not in line:
            k, v = line.split("=", 1)
            header[k.strip()] = v.strip()
        else:
            rows.append(line)
    variant = header.get("variant")
    q = int(header["q"])
    if variant == "rank_position":
        theta = np.zeros(q)
        for row in rows:
            r, t = row.split()
            theta[int(r)] = float(t)
        return RankPositionModel(theta)
    if variant == "full_table":
        table = {}
        fallback = None
        for row in rows:
            key, probs = (part.strip() for part in row.split("|"))
            vec = np.array([float(v) for v in probs.split()])
            if key == "fallback":
                fallback = vec
            else:
                table[tuple(int(v) for v in key.split())] = vec
        if fallback is None:
            raise ValueError("full_table post-processor without fallback row")
        return FullTableModel(table, fallback)
    raise ValueError(f"unknown post-processor variant {variant!r}")


def save(pp: PostProcessor, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(pp))


def load(path) -> PostProcessor:
    with open(path) as fh:
        return loads(fh.read())
