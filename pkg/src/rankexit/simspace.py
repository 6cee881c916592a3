"""Source, modulators, AWGN channel and the a-posteriori probability computer.

This is the "super-channel" feeding the rank retainer: uniform symbols over
GF(q) are modulated either as m natural-mapped BPSK symbols or as one square
QAM symbol, sent over AWGN, and turned back into posterior vectors P(x | y)
under a uniform prior.

An optional uniform quantiser per real dimension turns the channel into a
discrete one whose transition matrix can be enumerated exactly
(:func:`discrete_channel_matrix`); that is what the small-q oracles use.

Randomness is always passed in explicitly. :func:`substream` and
:func:`run_chunked` derive independent per-chunk generators from
``(seed, key..., chunk index)`` so results depend only on the chunk size and
never on the number of worker threads.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import log_ndtr, ndtr

from .galois import FieldSpec


class Modulation(enum.Enum):
    BPSK_BITWISE = "bpsk"
    SQUARE_QAM = "qam"


@dataclass(frozen=True)
class SourceConfig:
    field: FieldSpec
    seed: int = 0


@dataclass(frozen=True)
class ChannelConfig:
    """AWGN channel carrying one GF(q) symbol per use.

    ``es_over_n0_db`` may be ``-inf`` (useless channel, uniform posteriors)
    or ``+inf`` (noiseless). With ``quant_levels`` set, every real dimension
    of the observation is quantised to that many bins: uniform width on
    ``[-quant_range, quant_range]`` with the outer two bins unbounded.
    """

    field: FieldSpec
    modulation: Modulation = Modulation.BPSK_BITWISE
    es_over_n0_db: float = 10.0
    quant_levels: int | None = None
    quant_range: float | None = None

    def __post_init__(self):
        if isinstance(self.modulation, str):
            object.__setattr__(self, "modulation", Modulation(self.modulation))
        if self.modulation is Modulation.SQUARE_QAM and self.field.m % 2:
            raise ValueError(f"square QAM needs an even extension degree, got m={self.field.m}")
        if math.isnan(self.es_over_n0_db):
            raise ValueError("es_over_n0_db is NaN")
        if self.quant_levels is not None and self.quant_levels < 2:
            raise ValueError("quant_levels must be >= 2")

    @cached_property
    def points(self) -> np.ndarray:
        """Constellation, shape (q, dims); row x is the noiseless signal of x."""
        return constellation(self.field, self.modulation)

    @property
    def symbol_energy(self) -> float:
        return float(np.mean(np.sum(self.points**2, axis=1)))

    @property
    def noise_variance(self) -> float:
        """Noise variance per real dimension, N0/2."""
        if self.es_over_n0_db == -math.inf:
            return math.inf
        if self.es_over_n0_db == math.inf:
            return 0.0
        return self.symbol_energy / (2.0 * 10.0 ** (self.es_over_n0_db / 10.0))

    @property
    def dims(self) -> int:
        return self.points.shape[1]

    @cached_property
    def bin_edges(self) -> np.ndarray | None:
        """Interior quantiser edges (length quant_levels - 1), or None."""
        if self.quant_levels is None:
            return None
        r = self.quant_range
        if r is None:
            r = 1.5 * float(np.max(np.abs(self.points)))
        return np.linspace(-r, r, self.quant_levels + 1)[1:-1]

    def with_snr(self, es_over_n0_db: float) -> "ChannelConfig":
        return ChannelConfig(self.field, self.modulation, es_over_n0_db, self.quant_levels, self.quant_range)


def snr_convert(eb_over_n0_db: float, field: FieldSpec) -> float:
    """Es/N0 in dB from Eb/N0 in dB at log2(q) bits per symbol (no code rate)."""
    return eb_over_n0_db + 10.0 * math.log10(field.m)


def constellation(field: FieldSpec, modulation: Modulation) -> np.ndarray:
    modulation = Modulation(modulation)
    values = np.arange(field.q)
    if modulation is Modulation.BPSK_BITWISE:
        return 1.0 - 2.0 * field.bits(values)
    if field.m % 2:
        raise ValueError(f"square QAM needs an even extension degree, got m={field.m}")
    half = field.m // 2
    side = 1 << half
    # MSBs pick the in-phase level, LSBs the quadrature level, natural order.
    i_idx = values >> half
    q_idx = values & (side - 1)
    levels = 2.0 * np.arange(side) - (side - 1)
    scale = math.sqrt(2.0 * (side**2 - 1) / 3.0)
    return np.stack([levels[i_idx], levels[q_idx]], axis=1) / scale


def draw_symbols(n: int, cfg: SourceConfig | FieldSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """n i.i.d. uniform symbols; seeded from ``cfg.seed`` unless ``rng`` is given."""
    if n < 1:
        raise ValueError("n must be >= 1")
    field = cfg.field if isinstance(cfg, SourceConfig) else cfg
    if rng is None:
        rng = np.random.default_rng(cfg.seed if isinstance(cfg, SourceConfig) else None)
    return rng.integers(0, field.q, size=n)


def modulate(x, cfg: ChannelConfig) -> np.ndarray:
    """Noiseless signal point(s), shape (..., dims)."""
    return cfg.points[np.asarray(x)]


def awgn(s: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    var = cfg.noise_variance
    if math.isinf(var):
        raise ValueError("cannot sample a channel with infinite noise variance")
    s = np.asarray(s, dtype=float)
    if var == 0.0:
        return s.copy()
    return s + rng.normal(scale=math.sqrt(var), size=s.shape)


def quantize(y: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """Bin index per real dimension."""
    return np.searchsorted(cfg.bin_edges, y)


def _softmax_rows(loglik: np.ndarray) -> np.ndarray:
    loglik = loglik - loglik.max(axis=-1, keepdims=True)
    p = np.exp(loglik)
    return p / p.sum(axis=-1, keepdims=True)


def log_likelihoods(y: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """log p(y | x) up to a per-observation constant, shape (..., q)."""
    y = np.asarray(y, dtype=float)
    if cfg.quant_levels is not None:
        return _quantized_loglik(quantize(y, cfg), cfg)
    s = cfg.points
    var = cfg.noise_variance
    # -|y - s|^2 / 2var with the |y|^2 term dropped
    metric = y @ s.T - 0.5 * np.sum(s**2, axis=1)
    if var == 0.0:
        return np.where(metric == metric.max(axis=-1, keepdims=True), 0.0, -np.inf)
    return metric / var


def _bin_log_probs(cfg: ChannelConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per dimension: (log P(bin | level) table of shape (bins, levels), level index per symbol)."""
    sigma = math.sqrt(cfg.noise_variance)
    edges = np.concatenate([[-np.inf], cfg.bin_edges, [np.inf]])
    out = []
    for d in range(cfg.dims):
        levels, idx = np.unique(cfg.points[:, d], return_inverse=True)
        if sigma == 0.0:
            hit = (edges[:-1, None] < levels[None, :]) & (levels[None, :] <= edges[1:, None])
            with np.errstate(divide="ignore"):
                out.append((np.log(hit.astype(float)), idx))
            continue
        hi = (edges[1:, None] - levels[None, :]) / sigma
        lo = (edges[:-1, None] - levels[None, :]) / sigma
        # P = Phi(hi) - Phi(lo), evaluated on whichever tail keeps precision
        upper = lo > 0
        p = np.where(upper, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))
        with np.errstate(divide="ignore"):
            logp = np.log(p)
        # outer bins: single-tail probabilities straight from log_ndtr
        logp[0] = log_ndtr(hi[0])
        logp[-1] = log_ndtr(-lo[-1])
        out.append((logp, idx))
    return out


def _quantized_loglik(bins: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    if math.isinf(cfg.noise_variance):
        return np.zeros(bins.shape[:-1] + (cfg.field.q,))
    total = 0.0
    for d, (logp, idx) in enumerate(_bin_log_probs(cfg)):
        total = total + logp[bins[..., d]][..., idx]
    return total


def posterior(y: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """P(x | y) under a uniform prior, rows summing to one.

    Computed in the log domain with max subtraction. Infinite noise gives the
    uniform vector; zero noise gives the indicator of the nearest point.
    """
    if math.isinf(cfg.noise_variance):
        shape = np.shape(y)[:-1] + (cfg.field.q,)
        return np.full(shape, 1.0 / cfg.field.q)
    return _softmax_rows(log_likelihoods(y, cfg))


def transmit(x: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    """Modulate, add noise and compute posteriors in one go, shape (n, q)."""
    x = np.asarray(x)
    if math.isinf(cfg.noise_variance):
        return np.full(x.shape + (cfg.field.q,), 1.0 / cfg.field.q)
    return posterior(awgn(modulate(x, cfg), cfg, rng), cfg)


def _all_bins(cfg: ChannelConfig) -> np.ndarray:
    if cfg.quant_levels is None:
        raise ValueError("discrete channel enumeration needs a quantised channel")
    n_y = cfg.quant_levels**cfg.dims
    if n_y * cfg.field.q > 10**7:
        raise ValueError("discrete channel too large to enumerate")
    if math.isinf(cfg.noise_variance):
        raise ValueError("useless channel has no proper discrete observation model")
    return np.stack(np.unravel_index(np.arange(n_y), (cfg.quant_levels,) * cfg.dims), axis=-1)


def discrete_channel_matrix(cfg: ChannelConfig) -> np.ndarray:
    """Exact P(y | x) of a quantised channel, shape (q, levels**dims).

    Column index is the mixed-radix number of the per-dimension bins, first
    dimension most significant.
    """
    return np.exp(_quantized_loglik(_all_bins(cfg), cfg)).T


def discrete_posteriors(cfg: ChannelConfig) -> np.ndarray:
    """P(x | y) for every quantised observation, shape (levels**dims, q).

    Bit-identical to what :func:`posterior` returns for an observation
    falling in the same bins, so ranked lists agree exactly (ties included).
    """
    return _softmax_rows(_quantized_loglik(_all_bins(cfg), cfg))


def bin_index(y: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """Column index of :func:`discrete_channel_matrix` for observations y."""
    b = quantize(y, cfg)
    return np.ravel_multi_index(tuple(np.moveaxis(b, -1, 0)), (cfg.quant_levels,) * cfg.dims)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key...)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def run_chunked(fn, n: int, seed: int, key: tuple[int, ...] = (), chunk_size: int = 1 << 15, workers: int = 1):
    """Call ``fn(rng, n_chunk)`` over consecutive chunks; results in chunk order.

    Chunk k draws from ``substream(seed, *key, k)``, so the output is a
    function of ``(seed, key, chunk_size)`` only.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = [min(chunk_size, n - start) for start in range(0, n, chunk_size)]

    def task(k):
        return fn(substream(seed, *key, k), sizes[k])

    if workers <= 1 or len(sizes) == 1:
        return [task(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(len(sizes))))
