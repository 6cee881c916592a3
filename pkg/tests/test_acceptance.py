"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py`` (the lines appear in the
"acceptance criteria" section of the terminal summary) or execute this file
directly.
"""

import csv
import io
import math

import numpy as np
import pytest

from rankexit.cli import main
from rankexit.exitlab import SweepConfig, check_exit, rank_loss_sweep, var_exit_rank, var_exit_sumproduct
from rankexit.galois import FieldSpec
from rankexit.infomeasure import (
    SampleBatch,
    exact_mi,
    exact_mixed_info,
    exact_role_model_audit,
    mi_time_average,
    mixed_info,
)
from rankexit.rolemodel import RankPositionModel
from rankexit.selfcheck import (
    biawgn_mi,
    exact_instance,
    exact_table_model,
    full_table_tv,
    quantized_instance,
    random_ranked_joint,
    random_table_model,
)
from rankexit.simspace import ChannelConfig, snr_convert, transmit

GF4 = FieldSpec(2)
GF64 = FieldSpec(6)
EXIT_GRID = (-math.inf, *np.arange(0.0, 22.0 + 1e-9, 2.0))


def instances(seed, count=100):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        joint = random_ranked_joint(rng, 4, int(rng.integers(8, 65)))
        yield joint, random_table_model(rng, joint)


def test_c01_role_model_identity(report):
    worst = 0.0
    for joint, model in instances(101):
        a = exact_role_model_audit(joint, model)
        worst = max(worst, abs(a["lhs"] - (a["h_x_given_z"] - a["h_x_given_y"] + a["residual_divergence"])))
    report(1, "role-model identity", worst <= 1e-12, f"max |lhs - rhs| = {worst:.2e} on 100 instances")


def test_c02_inequality_chain(report):
    slack = math.inf
    eq = 0.0
    for joint, model in instances(102):
        i_xy, i_xz = exact_mi(joint, "XY"), exact_mi(joint, "XZ")
        slack = min(slack, i_xz - exact_mixed_info(joint, model), i_xy - i_xz)
        eq = max(eq, abs(exact_mixed_info(joint, exact_table_model(joint)) - i_xz))
    ok = slack >= -1e-12 and eq <= 1e-12
    report(2, "inequality chain", ok, f"min slack = {slack:.2e}, max |I'(exact Q) - I(X;Z)| = {eq:.2e}")


def test_c03_monte_carlo_convergence(report):
    channel = quantized_instance(GF4)
    joint = exact_instance(channel)
    tv, p_z, batch, pp = full_table_tv(channel, joint, 100_000, seed=300)
    seen = p_z > 0
    i_xz = exact_mi(joint, "XZ")
    est = mixed_info(SampleBatch(batch.x, batch.posterior, batch.rank, pp.apply(batch.rank)))

    def weighted_tv(n, seed):
        t, pz, _, _ = full_table_tv(channel, joint, n, seed)
        return float(np.sum(pz * t))

    small = np.mean([weighted_tv(100_000, 310 + s) for s in range(8)])
    large = np.mean([weighted_tv(400_000, 320 + s) for s in range(8)])
    ratio = large / small
    ok = tv[seen].max() <= 0.02 and abs(est.value - i_xz) <= 0.02 and 0.35 <= ratio <= 0.70
    detail = (
        f"max TV = {tv[seen].max():.4f}, mixed = {est.value:.4f} vs I(X;Z) = {i_xz:.4f}, "
        f"TV(4e5)/TV(1e5) = {ratio:.2f}"
    )
    report(3, "Monte Carlo convergence", ok, detail)


def test_c04_pathology_guard(report):
    channel = quantized_instance(GF4)
    rng = np.random.default_rng(400)
    post = transmit(rng.integers(0, 4, 100_000), channel, rng)
    certain = np.broadcast_to(np.eye(4)[0], post.shape)
    est = mixed_info(SampleBatch(None, post, post_processed=certain))
    report(4, "pathology guard", est.value <= 0.0, f"always-certain Q gives {est.value:.2f} bits (H(X) = 2)")


def test_c05_null_post_processor(report):
    channel = quantized_instance(GF4)
    rng = np.random.default_rng(500)
    post = transmit(rng.integers(0, 4, 100_000), channel, rng)
    batch = SampleBatch(None, post)
    batch.post_processed = RankPositionModel.uniform(4).apply(batch.rank)
    est = mixed_info(batch)
    ok = abs(est.value) <= 4 * est.std_error + 1e-12
    report(5, "null post-processor", ok, f"{est.value:.2e} +- {est.std_error:.1e} bits")


def test_c06_estimator_calibration(report):
    gf2 = FieldSpec(1)
    devs = []
    for k, snr in enumerate((-3.0, 0.0, 3.0)):
        channel = ChannelConfig(gf2, "bpsk", snr)
        rng = np.random.default_rng(600 + k)
        post = transmit(rng.integers(0, 2, 1_000_000), channel, rng)
        devs.append(abs(mi_time_average(SampleBatch(None, post)).value - biawgn_mi(channel.noise_variance)))
    report(6, "estimator calibration", max(devs) <= 0.01, "deviations " + ", ".join(f"{d:.1e}" for d in devs))


@pytest.mark.slow
def test_c07_rank_loss_gf64(report):
    lines = []
    ok = True
    for mod in ("bpsk", "qam"):
        cfg = SweepConfig(
            ChannelConfig(GF64, mod, 0.0), tuple(np.arange(0.0, 20.0 + 1e-9, 2.0)), n_train=200_000, n_eval=200_000, seed=7
        )
        recs = rank_loss_sweep(cfg)
        worst = max(r.loss for r in recs)
        ok &= all(r.loss <= 0.35 and r.loss >= -4 * r.loss_std for r in recs)
        lines.append(f"{mod} max loss {worst:.3f}")
    report(7, "rank loss over GF(64)", ok, ", ".join(lines) + " (bound 0.35)")


def exit_cfg(n, **kw):
    channel = ChannelConfig(GF64, "qam", snr_convert(8.5, GF64))
    return SweepConfig(channel, EXIT_GRID, d_v=2, d_c=4, n_train=n, n_eval=n, seed=8, **kw)


@pytest.mark.slow
def test_c08_variable_node_endpoint(report):
    cfg = exit_cfg(100_000)
    sp = var_exit_sumproduct(cfg).points[-1]
    rk = var_exit_rank(cfg).points[-1]
    gap = sp.i_e - rk.i_e
    sigma = math.hypot(sp.i_e_std, rk.i_e_std)
    ok = sp.i_e >= 5.95 and rk.i_e <= 5.95 and gap >= 4 * sigma
    detail = f"at I_A = {sp.i_a:.4f}: sum-product {sp.i_e:.4f}, rank {rk.i_e:.4f}, gap = {gap / sigma:.1f} sigma"
    report(8, "variable-node endpoint", ok, detail)


@pytest.mark.slow
def test_c09_check_node_loss(report):
    cfg = exit_cfg(50_000)
    sp = check_exit(cfg, "sum_product").by_snr()
    rk = check_exit(cfg, "rank").by_snr()
    excess = [
        (rk[s].i_e - sp[s].i_e) / max(math.hypot(rk[s].i_e_std, sp[s].i_e_std), 1e-300) for s in cfg.snr_grid
    ]
    ok = all(
        rk[s].i_e <= sp[s].i_e + 4 * math.hypot(rk[s].i_e_std, sp[s].i_e_std) for s in cfg.snr_grid
    )
    mid = [sp[s].i_e - rk[s].i_e for s in cfg.snr_grid]
    report(9, "check-node rank curve below sum-product", ok, f"largest loss {max(mid):.3f} bit, max excess {max(excess):.1f} sigma")


def _rows(text):
    return list(csv.DictReader(io.StringIO("\n".join(line for line in text.splitlines() if not line.startswith("#")))))


@pytest.mark.slow
def test_c10_determinism(report, tmp_path):
    base = ["--field", "6", "--mod", "qam", "--samples", "20000", "--seed", "10"]
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"rankloss_{name}.csv"
        assert main(["rankloss", *base, "--snr", "0:5:20", "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    identical = outs[0] == outs[1]

    runs = []
    for train_seed in ("10", "11"):
        path = tmp_path / f"exit_{train_seed}.csv"
        args = ["exit-var", *base, "--snr=-inf,6,14,20", "--ebn0", "8.5", "--train-seed", train_seed, "-o", str(path)]
        assert main(args) == 0
        runs.append(_rows(path.read_text()))
    worst = 0.0
    for r0, r1 in zip(*runs):
        assert r0["curve"] == r1["curve"] and r0["apriori_snr_db"] == r1["apriori_snr_db"]
        sigma = math.hypot(float(r0["i_e_std"]), float(r1["i_e_std"]))
        diff = abs(float(r0["i_e"]) - float(r1["i_e"]))
        worst = max(worst, diff / sigma if sigma > 0 else (0.0 if diff == 0 else math.inf))
    ok = identical and worst < 4.0
    report(10, "determinism", ok, f"byte-identical rerun: {identical}, max train-seed shift = {worst:.2f} sigma")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
