import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankexit.infomeasure import (
    EPS,
    DiscreteJoint,
    Estimate,
    SampleBatch,
    SampleRecord,
    entropy,
    exact_mi,
    exact_mixed_info,
    exact_role_model_audit,
    expected_divergence,
    mi_time_average,
    mixed_info,
)
from rankexit.messages import rank_retain


def random_posteriors(rng, n, q, alpha=0.5):
    return rng.dirichlet(np.full(q, alpha), size=n)


def loop_audit(p_xy, z_ranks, table):
    """Role-model identity terms by explicit loops over y and z."""
    q, n_y = p_xy.shape
    p_y = p_xy.sum(axis=0)
    lhs = h_xy = 0.0
    groups = {}
    for y in range(n_y):
        if p_y[y] == 0:
            continue
        post = p_xy[:, y] / p_y[y]
        for x in range(q):
            if post[x] > 0:
                lhs += p_y[y] * post[x] * math.log2(post[x] / table[y, x])
                h_xy -= p_y[y] * post[x] * math.log2(post[x])
        key = tuple(z_ranks[y])
        g = groups.setdefault(key, [np.zeros(q), table[y]])
        g[0] = g[0] + p_xy[:, y]
    h_xz = res = 0.0
    for p_xz, qz in groups.values():
        pz = p_xz.sum()
        post = p_xz / pz
        for x in range(q):
            if post[x] > 0:
                h_xz -= pz * post[x] * math.log2(post[x])
                res += pz * post[x] * math.log2(post[x] / qz[x])
    return lhs, h_xz, h_xy, res


def test_entropy_examples():
    assert entropy(np.full(64, 1 / 64)) == pytest.approx(6.0, abs=1e-12)
    assert entropy(np.eye(4)[1]) == 0.0
    assert entropy([0.5, 0.25, 0.25, 0.0]) == pytest.approx(1.5, abs=1e-12)


def test_mi_time_average_extremes():
    assert mi_time_average(SampleBatch(None, np.full((10, 4), 0.25))).value == pytest.approx(0.0, abs=1e-12)
    assert mi_time_average(SampleBatch(None, np.eye(4)[[0, 1, 2, 3, 1]])).value == pytest.approx(2.0)


def test_mixed_info_uniform_model_is_zero(rng):
    post = random_posteriors(rng, 100, 8)
    b = SampleBatch(None, post, post_processed=np.full((100, 8), 1 / 8))
    assert mixed_info(b).value == pytest.approx(0.0, abs=1e-12)


def test_mixed_info_equals_time_average_with_exact_model(rng):
    post = random_posteriors(rng, 200, 8)
    b = SampleBatch(None, post, post_processed=post)
    assert mixed_info(b).value == pytest.approx(mi_time_average(b).value, abs=1e-9)


def test_mixed_info_always_certain_closed_form(rng):
    q = 4
    post = random_posteriors(rng, 5000, q, alpha=1.0)
    certain = np.broadcast_to(np.eye(q)[0], post.shape)
    est = mixed_info(SampleBatch(None, post, post_processed=certain))
    # log2(1) on symbol 0, log2(eps) on the rest
    exact = math.log2(q) + np.mean(1 - post[:, 0]) * math.log2(EPS)
    assert est.value == pytest.approx(exact, abs=1e-9)
    approx = math.log2(q) + (1 - 1 / q) * math.log2(EPS)
    assert est.value == pytest.approx(approx, rel=0.05)
    assert est.value < -20


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), q=st.sampled_from([2, 4, 16]), n=st.integers(2, 50))
def test_divergence_identity_and_nonnegativity(seed, q, n):
    rng = np.random.default_rng(seed)
    post = random_posteriors(rng, n, q)
    model = random_posteriors(rng, n, q, alpha=2.0)
    b = SampleBatch(None, post, post_processed=model)
    d = expected_divergence(b)
    assert d.value >= -1e-12
    assert d.value == pytest.approx(mi_time_average(b).value - mixed_info(b).value, abs=1e-12)
    same = SampleBatch(None, post, post_processed=post)
    assert expected_divergence(same).value == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), split=st.integers(1, 99))
def test_order_invariance_and_chunk_merge(seed, split):
    rng = np.random.default_rng(seed)
    post = random_posteriors(rng, 100, 4)
    model = random_posteriors(rng, 100, 4, alpha=3.0)
    full = mixed_info(SampleBatch(None, post, post_processed=model))
    perm = rng.permutation(100)
    shuffled = mixed_info(SampleBatch(None, post[perm], post_processed=model[perm]))
    assert shuffled.value == pytest.approx(full.value, abs=1e-12)
    parts = [
        mixed_info(SampleBatch(None, post[:split], post_processed=model[:split])),
        mixed_info(SampleBatch(None, post[split:], post_processed=model[split:])),
    ]
    assert Estimate.merge(parts).value == pytest.approx(full.value, abs=1e-12)
    assert Estimate.merge(parts).n == 100


def test_estimate_standard_error():
    e = Estimate.from_terms([1.0, 2.0, 3.0, 4.0])
    assert e.value == 2.5
    assert e.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert e.n == 4


def test_records_and_batch_agree(rng):
    post = random_posteriors(rng, 5, 4)
    recs = [SampleRecord(i % 4, p) for i, p in enumerate(post)]
    b = SampleBatch.from_records(recs)
    np.testing.assert_array_equal(b.rank, rank_retain(post))
    assert mi_time_average(recs).value == mi_time_average(b).value


def test_exact_mi_examples():
    assert exact_mi(DiscreteJoint(np.full((4, 3), 1 / 12))) == pytest.approx(0.0, abs=1e-15)
    assert exact_mi(DiscreteJoint(np.eye(8) / 8)) == pytest.approx(3.0)
    eps = 0.1
    bsc = DiscreteJoint(0.5 * np.array([[1 - eps, eps], [eps, 1 - eps]]))
    h2 = -eps * math.log2(eps) - (1 - eps) * math.log2(1 - eps)
    assert exact_mi(bsc) == pytest.approx(1 - h2, abs=1e-12)
    assert exact_mi(bsc) == pytest.approx(0.53100, abs=5e-6)


def random_joint(rng, q=4, n_y=64):
    p_x = rng.dirichlet(np.full(q, 2.0))
    w = rng.dirichlet(np.full(n_y, 0.5), size=q)
    return DiscreteJoint.from_channel(w, p_x)


def test_audit_matches_loops(rng):
    for _ in range(20):
        joint = random_joint(rng)
        # Q must depend on y only through z
        ranks, labels = joint.z_labels()
        table = random_posteriors(rng, len(ranks), 4, alpha=1.0)[labels]
        a = exact_role_model_audit(joint, table)
        lhs, h_xz, h_xy, res = loop_audit(joint.p_xy, joint.z_ranks, table)
        assert a["lhs"] == pytest.approx(lhs, abs=1e-12)
        assert a["h_x_given_z"] == pytest.approx(h_xz, abs=1e-12)
        assert a["h_x_given_y"] == pytest.approx(h_xy, abs=1e-12)
        assert a["residual_divergence"] == pytest.approx(res, abs=1e-12)
        assert a["lhs"] == pytest.approx(a["h_x_given_z"] - a["h_x_given_y"] + a["residual_divergence"], abs=1e-12)


def test_audit_exact_model_and_constant_z(rng):
    joint = random_joint(rng)
    ranks, post_z = joint.posterior_given_z()
    _, labels = joint.z_labels()
    a = exact_role_model_audit(joint, post_z[labels])
    assert a["residual_divergence"] == pytest.approx(0.0, abs=1e-12)
    assert a["lhs"] == pytest.approx(a["h_x_given_z"] - a["h_x_given_y"], abs=1e-12)
    const = DiscreteJoint(joint.p_xy, np.tile(np.arange(4), (joint.p_xy.shape[1], 1)))
    a = exact_role_model_audit(const, np.tile(joint.p_x, (joint.p_xy.shape[1], 1)))
    assert a["h_x_given_z"] == pytest.approx(entropy(joint.p_x), abs=1e-12)


def test_exact_chain(rng):
    for _ in range(20):
        joint = random_joint(rng)
        ranks, post_z = joint.posterior_given_z()
        _, labels = joint.z_labels()
        i_xy, i_xz = exact_mi(joint, "XY"), exact_mi(joint, "XZ")
        rand = random_posteriors(rng, len(ranks), 4, alpha=1.0)[labels]
        assert exact_mixed_info(joint, rand) <= i_xz + 1e-12
        assert i_xz <= i_xy + 1e-12
        assert exact_mixed_info(joint, post_z[labels]) == pytest.approx(i_xz, abs=1e-12)


def test_audit_requires_z():
    with pytest.raises(ValueError):
        exact_role_model_audit(DiscreteJoint(np.full((2, 2), 0.25)), np.full((2, 2), 0.5))
