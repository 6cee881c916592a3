"""Experiment drivers: rank-retainer loss and EXIT curves over GF(2^m).

Every grid point is measured on three independent sample streams derived
from the seeds:

* stream 0 (``seed``): evaluation, where all reported numbers are computed;
* stream 1 (``train_seed``): fits the post-processors of the incoming lists;
* stream 2 (``train_seed``): fits the post-processor of the outgoing list.

A-priori messages come from a surrogate AWGN channel (square QAM by default)
whose SNR is swept; the realised I_A is measured by time averaging rather
than assumed. Sum-product extrinsic messages are true posteriors, so their
information is measured by time averaging as well. For the rank-based node
the incoming messages are reduced to ranked lists, mapped back to
distributions by fitted post-processors, combined with the sum-product rule
and re-ranked; the reported I_E is the mixed information of that outgoing
list, with the sum-product extrinsic posterior playing the role model. It is
therefore a lower bound on the information in the outgoing list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .galois import FieldSpec
from .infomeasure import EPS, Estimate, entropy_terms, mixed_terms, divergence_terms
from .messages import check_node, rank_retain, var_node
from .rolemodel import accumulator
from .simspace import ChannelConfig, Modulation, run_chunked, transmit

SUM_PRODUCT = "sum_product"
RANK = "rank"

EVAL, TRAIN_IN, TRAIN_OUT = 0, 1, 2


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of one sweep.

    ``channel`` is the communication channel (its SNR is swept by
    :func:`rank_loss_sweep` and fixed for the EXIT drivers). ``snr_grid`` is
    the list of Es/N0 values in dB swept by the driver: channel SNRs for the
    rank-loss sweep, surrogate a-priori SNRs for EXIT curves (``-inf`` gives
    I_A = 0 exactly).
    """

    channel: ChannelConfig
    snr_grid: tuple[float, ...]
    d_v: int = 2
    d_c: int = 4
    n_train: int = 50_000
    n_eval: int = 50_000
    seed: int = 0
    train_seed: int | None = None
    apriori_modulation: Modulation = Modulation.SQUARE_QAM
    model: str = "rank_position"
    chunk_size: int = 1 << 14
    workers: int = 1
    eps: float = EPS

    def __post_init__(self):
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        object.__setattr__(self, "apriori_modulation", Modulation(self.apriori_modulation))
        if self.d_v < 2 or self.d_c < 2:
            raise ValueError("node degrees must be >= 2")
        if self.n_train < 1 or self.n_eval < 1:
            raise ValueError("sample counts must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not self.snr_grid:
            raise ValueError("empty SNR grid")
        if self.model not in ("rank_position", "full_table"):
            raise ValueError(f"unknown post-processor family {self.model!r}")

    @property
    def field(self) -> FieldSpec:
        return self.channel.field

    @property
    def training_seed(self) -> int:
        return self.seed if self.train_seed is None else self.train_seed

    def apriori_channel(self, snr_db: float) -> ChannelConfig:
        return ChannelConfig(
            self.field, self.apriori_modulation, snr_db, self.channel.quant_levels, self.channel.quant_range
        )

    def describe(self) -> dict:
        """Flat echo of the configuration for result metadata."""
        return {
            "field_m": self.field.m,
            "prim_poly": hex(self.field.prim_poly),
            "modulation": self.channel.modulation.value,
            "es_over_n0_db": self.channel.es_over_n0_db,
            "quant_levels": self.channel.quant_levels,
            "quant_range": self.channel.quant_range,
            "snr_grid": list(self.snr_grid),
            "d_v": self.d_v,
            "d_c": self.d_c,
            "n_train": self.n_train,
            "n_eval": self.n_eval,
            "seed": self.seed,
            "train_seed": self.training_seed,
            "apriori_modulation": self.apriori_modulation.value,
            "model": self.model,
            "chunk_size": self.chunk_size,
            "eps": self.eps,
        }


@dataclass(frozen=True)
class ExitPoint:
    i_a: float
    i_e: float
    i_a_std: float
    i_e_std: float
    snr_db: float = math.nan
    # mixed information of the post-processed incoming lists (rank mode only)
    i_a_warped: float = math.nan
    i_a_warped_std: float = math.nan

    def transposed(self) -> "ExitPoint":
        return replace(self, i_a=self.i_e, i_e=self.i_a, i_a_std=self.i_e_std, i_e_std=self.i_a_std)


@dataclass
class CurveResult:
    name: str
    points: list[ExitPoint]
    metadata: dict = field(default_factory=dict)
    summaries: list[dict] = field(default_factory=list)
    transposed: bool = False
    # fitted post-processors per point (rank mode): keys "in", "channel", "out"
    models: list[dict] = field(default_factory=list)

    def __post_init__(self):
        order = sorted(range(len(self.points)), key=lambda k: self.points[k].i_a)
        self.points = [self.points[k] for k in order]
        if len(self.summaries) == len(order):
            self.summaries = [self.summaries[k] for k in order]
        if len(self.models) == len(order):
            self.models = [self.models[k] for k in order]

    def swap_axes(self) -> "CurveResult":
        """Curve reflected about the diagonal (used for check curves in a chart)."""
        return CurveResult(
            self.name,
            [p.transposed() for p in self.points],
            dict(self.metadata),
            list(self.summaries),
            not self.transposed,
            list(self.models),
        )

    @property
    def i_a(self) -> np.ndarray:
        return np.array([p.i_a for p in self.points])

    @property
    def i_e(self) -> np.ndarray:
        return np.array([p.i_e for p in self.points])

    @property
    def i_e_std(self) -> np.ndarray:
        return np.array([p.i_e_std for p in self.points])

    def by_snr(self) -> dict[float, ExitPoint]:
        return {p.snr_db: p for p in self.points}


@dataclass(frozen=True)
class RankLossRecord:
    snr_db: float
    i_xy: float
    i_xy_std: float
    i_xz_lower: float
    i_xz_std: float
    loss: float
    loss_std: float


def _chunks(cfg: SweepConfig, draw, n: int, seed: int, key: tuple[int, ...]):
    return run_chunked(draw, n, seed, key, cfg.chunk_size, cfg.workers)


# --- rank-retainer loss -------------------------------------------------------


def rank_loss_sweep(cfg: SweepConfig) -> list[RankLossRecord]:
    """I(X;Y), the mixed-information bound on I(X;Z) and their gap per channel SNR."""
    q = cfg.field.q
    h_x = math.log2(q)
    records = []
    for idx, snr in enumerate(cfg.snr_grid):
        channel = cfg.channel.with_snr(snr)

        def train(rng, n):
            post = transmit(rng.integers(0, q, n), channel, rng)
            return accumulator(cfg.model, q).update(post, rank_retain(post))

        parts = _chunks(cfg, train, cfg.n_train, cfg.training_seed, (idx, TRAIN_IN))
        pp = _merge(parts).model()

        def evaluate(rng, n):
            post = transmit(rng.integers(0, q, n), channel, rng)
            qz = pp.apply(rank_retain(post))
            return (
                entropy_terms(post, h_x),
                mixed_terms(post, qz, h_x, cfg.eps),
                divergence_terms(post, qz, cfg.eps),
            )

        ev = _chunks(cfg, evaluate, cfg.n_eval, cfg.seed, (idx, EVAL))
        i_xy, i_xz, loss = (Estimate.from_terms(np.concatenate([e[k] for e in ev])) for k in range(3))
        records.append(RankLossRecord(snr, i_xy.value, i_xy.std_error, i_xz.value, i_xz.std_error, loss.value, loss.std_error))
    return records


def _merge(parts):
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.merge(p)
    return acc


# --- a-priori messages ----------------------------------------------------------


def apriori_samples(snr_db: float, n: int, cfg: SweepConfig, rng: np.random.Generator | None = None):
    """Symbols and surrogate-channel posteriors at one a-priori SNR.

    Returns ``(x, posteriors, I_A estimate)``.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    x = rng.integers(0, cfg.field.q, n)
    post = transmit(x, cfg.apriori_channel(snr_db), rng)
    return x, post, Estimate.from_terms(entropy_terms(post, math.log2(cfg.field.q)))


# --- node scenarios ---------------------------------------------------------------


class _VarScenario:
    """Variable node: channel message plus d_v - 1 a-priori messages on the same symbol."""

    def __init__(self, cfg: SweepConfig, snr: float):
        self.cfg = cfg
        self.apriori = cfg.apriori_channel(snr)
        self.n_in = cfg.d_v - 1

    def draw(self, rng, n):
        x = rng.integers(0, self.cfg.field.q, n)
        ch = transmit(x, self.cfg.channel, rng)
        aps = [transmit(x, self.apriori, rng) for _ in range(self.n_in)]
        return {"x": x, "ch": ch, "aps": aps}

    def combine(self, d, msgs, ch_msg):
        return var_node([ch_msg, *msgs])


class _CheckScenario:
    """Check node: d_c - 1 a-priori messages on independent symbols, random nonzero labels."""

    def __init__(self, cfg: SweepConfig, snr: float):
        if cfg.d_c < 3:
            raise ValueError("check-node EXIT needs d_c >= 3")
        self.cfg = cfg
        self.apriori = cfg.apriori_channel(snr)
        self.n_in = cfg.d_c - 1

    def draw(self, rng, n):
        gf = self.cfg.field
        xs = rng.integers(0, gf.q, (self.n_in, n))
        labels = rng.integers(1, gf.q, (self.cfg.d_c, n))
        s = np.zeros(n, dtype=np.int64)
        for j in range(self.n_in):
            s ^= gf.mul(labels[j], xs[j])
        x = gf.mul(gf.inv(labels[-1]), s)
        aps = [transmit(xs[j], self.apriori, rng) for j in range(self.n_in)]
        return {"x": x, "ch": None, "aps": aps, "labels": labels}

    def combine(self, d, msgs, ch_msg):
        labels = d["labels"]
        return check_node(self.cfg.field, msgs, list(labels[:-1]), labels[-1])


def _scenario(kind: str, cfg: SweepConfig, snr: float):
    if kind == "var":
        return _VarScenario(cfg, snr)
    if kind == "check":
        return _CheckScenario(cfg, snr)
    raise ValueError(f"unknown node kind {kind!r}")


def _i_a_terms(aps, h_x):
    return np.mean([entropy_terms(p, h_x) for p in aps], axis=0)


def _sum_product_point(cfg: SweepConfig, kind: str, idx: int, snr: float) -> ExitPoint:
    sc = _scenario(kind, cfg, snr)
    h_x = math.log2(cfg.field.q)

    def evaluate(rng, n):
        d = sc.draw(rng, n)
        ext = sc.combine(d, d["aps"], d["ch"])
        return _i_a_terms(d["aps"], h_x), entropy_terms(ext, h_x)

    ev = _chunks(cfg, evaluate, cfg.n_eval, cfg.seed, (idx, EVAL))
    i_a = Estimate.from_terms(np.concatenate([e[0] for e in ev]))
    i_e = Estimate.from_terms(np.concatenate([e[1] for e in ev]))
    return ExitPoint(i_a.value, i_e.value, i_a.std_error, i_e.std_error, snr)


def _rank_point(cfg: SweepConfig, kind: str, idx: int, snr: float) -> tuple[ExitPoint, dict, dict]:
    sc = _scenario(kind, cfg, snr)
    q = cfg.field.q
    h_x = math.log2(q)
    eps = cfg.eps

    def fit_inputs(rng, n):
        d = sc.draw(rng, n)
        acc_in = accumulator(cfg.model, q)
        for p in d["aps"]:
            acc_in.update(p, rank_retain(p))
        acc_ch = accumulator(cfg.model, q)
        if d["ch"] is not None:
            acc_ch.update(d["ch"], rank_retain(d["ch"]))
        return acc_in, acc_ch

    parts = _chunks(cfg, fit_inputs, cfg.n_train, cfg.training_seed, (idx, TRAIN_IN))
    pp_in = _merge([p[0] for p in parts]).model()
    pp_ch = _merge([p[1] for p in parts]).model() if kind == "var" else None

    def rank_pipeline(d):
        """Returns (sum-product extrinsic, outgoing ranked list, incoming lists)."""
        z_in = [rank_retain(p) for p in d["aps"]]
        q_in = [np.maximum(pp_in.apply(z), eps) for z in z_in]
        q_ch = None
        if d["ch"] is not None:
            q_ch = np.maximum(pp_ch.apply(rank_retain(d["ch"])), eps)
        z_out = rank_retain(sc.combine(d, q_in, q_ch))
        truth = sc.combine(d, d["aps"], d["ch"])
        return truth, z_out, z_in

    def fit_output(rng, n):
        truth, z_out, _ = rank_pipeline(sc.draw(rng, n))
        return accumulator(cfg.model, q).update(truth, z_out)

    pp_out = _merge(_chunks(cfg, fit_output, cfg.n_train, cfg.training_seed, (idx, TRAIN_OUT))).model()

    def evaluate(rng, n):
        d = sc.draw(rng, n)
        truth, z_out, z_in = rank_pipeline(d)
        warped = np.mean([mixed_terms(p, pp_in.apply(z), h_x, eps) for p, z in zip(d["aps"], z_in)], axis=0)
        return _i_a_terms(d["aps"], h_x), warped, mixed_terms(truth, pp_out.apply(z_out), h_x, eps)

    ev = _chunks(cfg, evaluate, cfg.n_eval, cfg.seed, (idx, EVAL))
    i_a, warped, i_e = (Estimate.from_terms(np.concatenate([e[k] for e in ev])) for k in range(3))
    point = ExitPoint(i_a.value, i_e.value, i_a.std_error, i_e.std_error, snr, warped.value, warped.std_error)
    summary = {"snr_db": snr, "in": pp_in.summary(), "out": pp_out.summary()}
    if pp_ch is not None:
        summary["channel"] = pp_ch.summary()
    return point, summary, {"in": pp_in, "channel": pp_ch, "out": pp_out}


def _curve(cfg: SweepConfig, kind: str, mode: str) -> CurveResult:
    points, summaries, models = [], [], []
    for idx, snr in enumerate(cfg.snr_grid):
        if mode == SUM_PRODUCT:
            points.append(_sum_product_point(cfg, kind, idx, snr))
        elif mode == RANK:
            p, s, mdl = _rank_point(cfg, kind, idx, snr)
            points.append(p)
            summaries.append(s)
            models.append(mdl)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    meta = {**cfg.describe(), "node": kind, "mode": mode}
    return CurveResult(f"{kind}_{'sp' if mode == SUM_PRODUCT else 'rank'}", points, meta, summaries, models=models)


def var_exit_sumproduct(cfg: SweepConfig) -> CurveResult:
    """Variable-node EXIT curve of the sum-product rule."""
    return _curve(cfg, "var", SUM_PRODUCT)


def var_exit_rank(cfg: SweepConfig) -> CurveResult:
    """Mixed-information lower bound on the rank-based variable-node EXIT curve.

    ``i_a`` is the information of the original incoming messages (the axis
    shared with the sum-product curve); ``i_a_warped`` is the mixed
    information of the post-processed incoming lists.
    """
    return _curve(cfg, "var", RANK)


def check_exit(cfg: SweepConfig, mode: str = SUM_PRODUCT) -> CurveResult:
    return _curve(cfg, "check", mode)


def full_chart(cfg: SweepConfig) -> dict[str, CurveResult]:
    """The four curves of an EXIT chart; check curves have their axes swapped."""
    return {
        "var_sp": var_exit_sumproduct(cfg),
        "var_rank": var_exit_rank(cfg),
        "check_sp": check_exit(cfg, SUM_PRODUCT).swap_axes(),
        "check_rank": check_exit(cfg, RANK).swap_axes(),
    }


def tunnel_gap(
    var_curve: CurveResult, check_curve_swapped: CurveResult, i_max: float | None = None, n_grid: int = 200
) -> float:
    """Smallest vertical gap between the variable curve and the swapped check curve.

    Both curves are linearly interpolated over the I range they share,
    optionally cut at ``i_max`` (both curves meet at (log2 q, log2 q), so the
    gap always closes at the very end). Positive means the tunnel is open.
    """
    vx, vy = var_curve.i_a, var_curve.i_e
    cx, cy = check_curve_swapped.i_a, check_curve_swapped.i_e
    lo = max(vx.min(), cx.min())
    hi = min(vx.max(), cx.max())
    if i_max is not None:
        hi = min(hi, i_max)
    if hi <= lo:
        raise ValueError("curves do not overlap")
    grid = np.linspace(lo, hi, n_grid)
    return float(np.min(np.interp(grid, vx, vy) - np.interp(grid, cx, cy)))
