"""Messages over GF(2^m) and the sum-product node rules.

A probability message is a float array whose last axis has length q; a
ranked list is an integer array of the same shape holding a permutation of
0..q-1, position 0 being the most probable symbol. Every function here works
on a single message or on a stack of them (leading axes are batch axes).
"""

from __future__ import annotations

import numpy as np

from .galois import FieldSpec

CLAMP_TOL = 1e-12


def validate_probs(p, q: int | None = None, atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if q is not None and p.shape[-1] != q:
        raise ValueError(f"expected messages of length {q}, got {p.shape[-1]}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > atol):
        raise ValueError("probabilities must sum to one")
    return p


def is_permutation(z) -> bool:
    z = np.asarray(z)
    return bool(np.all(np.sort(z, axis=-1) == np.arange(z.shape[-1])))


def rank_retain(p) -> np.ndarray:
    """Symbols in order of decreasing probability; ties go to the smaller symbol."""
    p = np.asarray(p, dtype=float)
    return np.argsort(-p, axis=-1, kind="stable")


def rank_positions(z) -> np.ndarray:
    """Inverse permutation: ``pos[..., x]`` is the position of symbol x in z."""
    z = np.asarray(z)
    pos = np.empty_like(z)
    np.put_along_axis(pos, z, np.broadcast_to(np.arange(z.shape[-1]), z.shape), axis=-1)
    return pos


def var_node(incoming) -> np.ndarray:
    """Sum-product variable-node rule: normalised elementwise product.

    ``incoming`` is a sequence of messages (or an array whose first axis
    enumerates them). The product is formed in the log domain so that
    messages with very small entries do not underflow to an all-zero vector.
    """
    msgs = [np.asarray(m, dtype=float) for m in incoming]
    if not msgs:
        raise ValueError("variable node needs at least one incoming message")
    with np.errstate(divide="ignore"):
        logp = sum(np.log(m) for m in msgs)
    top = logp.max(axis=-1, keepdims=True)
    if np.any(np.isneginf(top)):
        raise ValueError("incoming messages have disjoint supports (all-zero product)")
    out = np.exp(logp - top)
    return out / out.sum(axis=-1, keepdims=True)


def wht(v) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis.

    Self-inverse up to a factor q, and it turns XOR-convolution into a
    pointwise product.
    """
    v = np.array(v, dtype=float)
    q = v.shape[-1]
    if q < 1 or q & (q - 1):
        raise ValueError(f"length must be a power of two, got {q}")
    h = 1
    while h < q:
        v = v.reshape(v.shape[:-1] + (q // (2 * h), 2, h))
        a = v[..., 0, :]
        b = v[..., 1, :]
        v = np.stack([a + b, a - b], axis=-2).reshape(v.shape[:-3] + (q,))
        h *= 2
    return v


def permute_by_label(gf: FieldSpec, p, label) -> np.ndarray:
    """Distribution of h*x given the distribution p of x (h nonzero)."""
    p = np.asarray(p, dtype=float)
    label = np.asarray(label)
    if np.any(label == 0):
        raise ValueError("edge labels must be nonzero")
    idx = gf.mul_table[label]
    idx = np.broadcast_to(idx, p.shape)
    out = np.empty_like(p)
    np.put_along_axis(out, idx, p, axis=-1)
    return out


def unpermute_by_label(gf: FieldSpec, p, label) -> np.ndarray:
    """Distribution of x = h^-1 * s given the distribution p of s."""
    p = np.asarray(p, dtype=float)
    label = np.asarray(label)
    if np.any(label == 0):
        raise ValueError("edge labels must be nonzero")
    idx = np.broadcast_to(gf.mul_table[label], p.shape)
    return np.take_along_axis(p, idx, axis=-1)


def _clamp_normalise(p: np.ndarray) -> np.ndarray:
    if np.any(p < -CLAMP_TOL):
        raise FloatingPointError(f"transform round-off exceeded {CLAMP_TOL}: min {p.min()}")
    p = np.maximum(p, 0.0)
    return p / p.sum(axis=-1, keepdims=True)


def check_node(gf: FieldSpec, incoming, labels, out_label) -> np.ndarray:
    """Sum-product check-node rule over GF(2^m).

    The parity is ``out_label * x_out = sum_j labels[j] * x_j``; the result is
    the distribution of x_out given the incoming messages on the other
    ``d_c - 1`` edges. Labels may be scalars or per-message arrays matching
    the batch shape.
    """
    msgs = [np.asarray(m, dtype=float) for m in incoming]
    if len(msgs) != len(labels):
        raise ValueError("need one label per incoming message")
    if not msgs:
        raise ValueError("check node needs at least one incoming message")
    spectrum = 1.0
    for m, h in zip(msgs, labels):
        spectrum = spectrum * wht(permute_by_label(gf, m, h))
    s = wht(spectrum) / gf.q
    return _clamp_normalise(unpermute_by_label(gf, _clamp_normalise(s), out_label))


def check_node_direct(gf: FieldSpec, incoming, labels, out_label) -> np.ndarray:
    """O(q^2)-per-step reference version of :func:`check_node` (single messages only)."""
    q = gf.q
    acc = np.zeros(q)
    acc[0] = 1.0
    for m, h in zip(incoming, labels):
        m = permute_by_label(gf, np.asarray(m, dtype=float), h)
        new = np.zeros(q)
        for a in range(q):
            for b in range(q):
                new[a ^ b] += acc[a] * m[b]
        acc = new
    return unpermute_by_label(gf, acc, out_label)
