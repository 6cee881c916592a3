"""Exact-oracle checks behind ``rankexit selftest``.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
check, so the caller can report every line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .galois import FieldSpec
from .infomeasure import (
    DiscreteJoint,
    SampleBatch,
    exact_mi,
    exact_mixed_info,
    exact_role_model_audit,
    mi_time_average,
    mixed_info,
)
from .messages import rank_retain
from .rolemodel import FullTableModel, RankPositionModel, fit_full_table
from .simspace import ChannelConfig, Modulation, discrete_channel_matrix, discrete_posteriors, transmit


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def biawgn_mi(noise_variance: float, n_nodes: int = 200) -> float:
    """I(X;Y) of BPSK (+-1) over AWGN by Gauss-Hermite quadrature.

    Given x = +1 the LLR is Gaussian with mean 2/var and variance 4/var, and
    I = 1 - E[log2(1 + exp(-LLR))].
    """
    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
    mu = 2.0 / noise_variance
    sd = 2.0 / math.sqrt(noise_variance)
    llr = mu + math.sqrt(2.0) * sd * nodes
    return 1.0 - float(np.sum(weights * np.logaddexp(0.0, -llr)) / math.sqrt(math.pi) / math.log(2.0))


def random_ranked_joint(rng: np.random.Generator, q: int, n_y: int) -> DiscreteJoint:
    """Random P(x, y) with a non-uniform prior; Z = rank of P(x | y)."""
    p_x = rng.dirichlet(np.full(q, 2.0))
    w = rng.dirichlet(np.full(n_y, 0.5), size=q)
    return DiscreteJoint.from_channel(w, p_x)


def random_table_model(rng: np.random.Generator, joint: DiscreteJoint) -> FullTableModel:
    ranks, _ = joint.z_labels()
    table = {tuple(int(v) for v in r): rng.dirichlet(np.ones(joint.q)) for r in ranks}
    return FullTableModel(table, np.full(joint.q, 1.0 / joint.q))


def exact_table_model(joint: DiscreteJoint) -> FullTableModel:
    ranks, post = joint.posterior_given_z()
    table = {tuple(int(v) for v in r): row for r, row in zip(ranks, post)}
    return FullTableModel(table, joint.p_x)


def check_role_model_identity(field: FieldSpec, n_instances: int = 100, n_y: int = 64, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        joint = random_ranked_joint(rng, field.q, n_y)
        a = exact_role_model_audit(joint, random_table_model(rng, joint))
        rhs = a["h_x_given_z"] - a["h_x_given_y"] + a["residual_divergence"]
        worst = max(worst, abs(a["lhs"] - rhs))
    return CheckResult("role-model identity", worst <= 1e-12, f"max |lhs - rhs| = {worst:.3g} over {n_instances} instances")


def check_inequality_chain(field: FieldSpec, n_instances: int = 100, n_y: int = 64, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    min_slack = math.inf
    worst_eq = 0.0
    for _ in range(n_instances):
        joint = random_ranked_joint(rng, field.q, n_y)
        i_xy = exact_mi(joint, "XY")
        i_xz = exact_mi(joint, "XZ")
        mixed = exact_mixed_info(joint, random_table_model(rng, joint))
        mixed_opt = exact_mixed_info(joint, exact_table_model(joint))
        min_slack = min(min_slack, i_xz - mixed, i_xy - i_xz)
        worst_eq = max(worst_eq, abs(mixed_opt - i_xz))
    ok = min_slack >= -1e-12 and worst_eq <= 1e-12
    return CheckResult("inequality chain", ok, f"min slack = {min_slack:.3g}, |I'(opt) - I(X;Z)| <= {worst_eq:.3g}")


def quantized_instance(field: FieldSpec, es_over_n0_db: float = 2.0, levels: int | None = None) -> ChannelConfig:
    if levels is None:
        levels = max(2, int(round(64 ** (1.0 / field.m))))
    return ChannelConfig(field, Modulation.BPSK_BITWISE, es_over_n0_db, quant_levels=levels)


def exact_instance(channel: ChannelConfig) -> DiscreteJoint:
    w = discrete_channel_matrix(channel)
    p_xy = w / channel.field.q
    return DiscreteJoint(p_xy, rank_retain(discrete_posteriors(channel)))


def full_table_tv(channel: ChannelConfig, joint: DiscreteJoint, n: int, seed: int):
    """Fit a full table on n samples; return (per-rank TV errors, P(z), samples, model)."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, channel.field.q, n)
    post = transmit(x, channel, rng)
    batch = SampleBatch(x, post)
    pp = fit_full_table(batch)
    ranks, exact = joint.posterior_given_z()
    _, labels = joint.z_labels()
    p_z = np.bincount(labels, weights=joint.p_y, minlength=len(ranks))
    tv = 0.5 * np.abs(pp.apply(ranks) - exact).sum(axis=1)
    return tv, p_z, batch, pp


def check_monte_carlo(field: FieldSpec, n: int = 100_000, seed: int = 3) -> CheckResult:
    channel = quantized_instance(field)
    joint = exact_instance(channel)
    tv, p_z, batch, pp = full_table_tv(channel, joint, n, seed)
    seen = p_z > 0
    i_xz = exact_mi(joint, "XZ")
    est = mixed_info(SampleBatch(batch.x, batch.posterior, batch.rank, pp.apply(batch.rank)))
    ok = tv[seen].max() <= 0.02 and abs(est.value - i_xz) <= 0.02
    return CheckResult(
        "Monte Carlo convergence",
        ok,
        f"max TV = {tv[seen].max():.4f}, mixed = {est.value:.4f} vs I(X;Z) = {i_xz:.4f}",
    )


def check_pathology(field: FieldSpec, n: int = 100_000, seed: int = 4) -> CheckResult:
    channel = quantized_instance(field)
    rng = np.random.default_rng(seed)
    post = transmit(rng.integers(0, field.q, n), channel, rng)
    certain = np.zeros(field.q)
    certain[0] = 1.0
    batch = SampleBatch(None, post, post_processed=np.broadcast_to(certain, post.shape))
    est = mixed_info(batch)
    return CheckResult("pathology guard", est.value <= 0.0, f"always-certain post-processor gives {est.value:.3f} bits")


def check_null(field: FieldSpec, n: int = 100_000, seed: int = 5) -> CheckResult:
    channel = quantized_instance(field)
    rng = np.random.default_rng(seed)
    post = transmit(rng.integers(0, field.q, n), channel, rng)
    batch = SampleBatch(None, post)
    batch.post_processed = RankPositionModel.uniform(field.q).apply(batch.rank)
    est = mixed_info(batch)
    ok = abs(est.value) <= 4 * est.std_error + 1e-12
    return CheckResult("null post-processor", ok, f"{est.value:.3g} +- {est.std_error:.2g} bits")


def check_calibration(snrs_db=(-3.0, 0.0, 3.0), n: int = 1_000_000, seed: int = 6) -> CheckResult:
    gf2 = FieldSpec(1)
    worst = 0.0
    for k, snr in enumerate(snrs_db):
        channel = ChannelConfig(gf2, Modulation.BPSK_BITWISE, snr)
        rng = np.random.default_rng(seed + k)
        post = transmit(rng.integers(0, 2, n), channel, rng)
        est = mi_time_average(SampleBatch(None, post))
        worst = max(worst, abs(est.value - biawgn_mi(channel.noise_variance)))
    return CheckResult("BI-AWGN calibration", worst <= 0.01, f"max deviation from quadrature = {worst:.4g} bits")


def run_all(field: FieldSpec) -> list[CheckResult]:
    return [
        check_role_model_identity(field),
        check_inequality_chain(field),
        check_monte_carlo(field),
        check_pathology(field),
        check_null(field),
        check_calibration(),
    ]
