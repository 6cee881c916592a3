"""Arithmetic in GF(2^m) on the integers 0..q-1 (polynomial basis).

Addition is XOR. Multiplication and inversion go through log/antilog tables
built once per field. All functions accept Python ints or integer numpy
arrays and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# Bitmask of the primitive polynomial, x^m term included.
DEFAULT_PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) with a primitive polynomial given as a bitmask.

    >>> gf = FieldSpec(2)
    >>> gf.q, gf.mul(2, 2), gf.inv(2)
    (4, 3, 3)
    """

    m: int
    prim_poly: int | None = None
    _tables: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or not 1 <= self.m <= 16:
            raise ValueError(f"extension degree must be in 1..16, got {self.m!r}")
        if self.prim_poly is None:
            object.__setattr__(self, "prim_poly", DEFAULT_PRIMITIVE_POLYS[self.m])
        if self.prim_poly.bit_length() != self.m + 1:
            raise ValueError(f"polynomial {self.prim_poly:#x} does not have degree {self.m}")
        object.__setattr__(self, "_tables", _build_tables(self.m, self.prim_poly))

    @property
    def q(self) -> int:
        return 1 << self.m

    @property
    def exp_table(self) -> np.ndarray:
        """alpha^k for k = 0..2(q-1)-1 (doubled to skip a modulo)."""
        return self._tables[0]

    @property
    def log_table(self) -> np.ndarray:
        """Discrete log base alpha; entry 0 is unused (set to -1)."""
        return self._tables[1]

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full q x q product table, used for vectorised label permutations."""
        a = np.arange(self.q)
        return self.mul(a[:, None], a[None, :])

    @cached_property
    def inv_table(self) -> np.ndarray:
        """inv_table[a] = a^-1 for a != 0; inv_table[0] = 0 as a placeholder."""
        out = np.zeros(self.q, dtype=np.int64)
        nz = np.arange(1, self.q)
        out[1:] = self.exp_table[(self.q - 1 - self.log_table[nz]) % (self.q - 1)]
        return out

    def add(self, a, b):
        return gf_add(self, a, b)

    def mul(self, a, b):
        return gf_mul(self, a, b)

    def inv(self, a):
        return gf_inv(self, a)

    def bits(self, a) -> np.ndarray:
        """Natural binary expansion, MSB first, shape (..., m)."""
        a = np.asarray(a)
        shifts = np.arange(self.m - 1, -1, -1)
        return (a[..., None] >> shifts) & 1


def _build_tables(m: int, prim_poly: int) -> tuple[np.ndarray, np.ndarray]:
    q = 1 << m
    order = q - 1
    exp = np.zeros(2 * order, dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    x = 1
    for k in range(order):
        if log[x] != -1:
            raise ValueError(f"polynomial {prim_poly:#x} is not primitive over GF(2^{m})")
        exp[k] = x
        log[x] = k
        x <<= 1
        if x & q:
            x ^= prim_poly
    if x != 1:
        raise ValueError(f"polynomial {prim_poly:#x} is not primitive over GF(2^{m})")
    exp[order:] = exp[:order]
    exp.setflags(write=False)
    log.setflags(write=False)
    return exp, log


def _check_range(gf: FieldSpec, *values) -> None:
    for v in values:
        arr = np.asarray(v)
        if arr.size and (arr.min() < 0 or arr.max() >= gf.q):
            raise ValueError(f"element outside GF({gf.q})")


def gf_add(gf: FieldSpec, a, b):
    """Characteristic-2 addition (and subtraction): bitwise XOR."""
    _check_range(gf, a, b)
    out = np.bitwise_xor(a, b)
    if np.ndim(out) == 0:
        return int(out)
    return out


def gf_mul(gf: FieldSpec, a, b):
    _check_range(gf, a, b)
    a_arr, b_arr = np.asarray(a), np.asarray(b)
    zero = (a_arr == 0) | (b_arr == 0)
    la = gf.log_table[a_arr]
    lb = gf.log_table[b_arr]
    out = np.where(zero, 0, gf.exp_table[np.where(zero, 0, la + lb)])
    if out.ndim == 0:
        return int(out)
    return out


def gf_inv(gf: FieldSpec, a):
    _check_range(gf, a)
    a_arr = np.asarray(a)
    if np.any(a_arr == 0):
        raise ZeroDivisionError("0 has no multiplicative inverse")
    out = gf.exp_table[(gf.q - 1 - gf.log_table[a_arr]) % (gf.q - 1)]
    if out.ndim == 0:
        return int(out)
    return out
