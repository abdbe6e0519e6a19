"""Binary primitive BCH codes over GF(2^m) with bounded-distance decoding.

Narrow-sense construction: the generator is the lcm of the minimal
polynomials of alpha^1 .. alpha^2t. Decoding runs syndrome computation,
Berlekamp-Massey, and Chien search, failing cleanly beyond the radius.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "BinaryField",
    "BchCode",
    "DecodeOutcome",
    "build_code",
    "encode",
    "decode",
    "save_code",
    "load_code",
]

# Standard primitive polynomials, bit i = coefficient of x^i.
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,
    10: 0b10000001001,
}


class BinaryField:
    """GF(2^m) with numpy log/antilog tables (alpha = root of the primitive poly)."""

    def __init__(self, m: int, primitive_poly: int | None = None):
        if m not in PRIMITIVE_POLYS and primitive_poly is None:
            raise ValueError(f"no default primitive polynomial for m={m}")
        self.m = m
        self.poly = primitive_poly if primitive_poly is not None else PRIMITIVE_POLYS[m]
        self.order = (1 << m) - 1
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(self.order + 1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            if i > 0 and x == 1:
                raise ValueError("polynomial is not primitive")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & (1 << m):
                x ^= self.poly
        if x != 1:
            raise ValueError("polynomial is not primitive")
        exp[self.order :] = exp[: self.order]
        self.exp = exp
        self.log = log
        # Plain-list copies: scalar-heavy loops (Berlekamp-Massey) are much
        # faster indexing Python ints than 0-d numpy scalars.
        self.exp_list = exp.tolist()
        self.log_list = log.tolist()

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return int(self.exp[self.order - self.log[a]])

    def pow_alpha(self, e: int) -> int:
        return int(self.exp[e % self.order])

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product of field-element arrays."""
        out = self.exp[(self.log[a] + self.log[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    def dot(self, a: np.ndarray, b: np.ndarray) -> int:
        """XOR-accumulated inner product."""
        return int(np.bitwise_xor.reduce(self.mul_vec(a, b)))


@dataclass(frozen=True)
class BchCode:
    field: BinaryField
    n: int
    k: int
    t: int
    d_design: int
    generator: int  # GF(2) polynomial, bit i = coefficient of x^i

    @property
    def parity_bits(self) -> int:
        return self.n - self.k


@dataclass(frozen=True)
class DecodeOutcome:
    status: str  # "corrected" | "decode_failure"
    message: np.ndarray | None
    errors_corrected: int

    @property
    def ok(self) -> bool:
        return self.status == "corrected"


def _minimal_polynomial(field: BinaryField, power: int) -> int:
    """Minimal polynomial of alpha^power over GF(2), as a bitmask poly."""
    # Conjugacy class {power * 2^j mod (2^m - 1)}.
    coset = []
    e = power % field.order
    while e not in coset:
        coset.append(e)
        e = (e * 2) % field.order
    # Product of (x - alpha^e) with GF(2^m) coefficient arithmetic.
    poly = [1]  # coefficients, low degree first
    for e in coset:
        root = field.pow_alpha(e)
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] ^= c
            nxt[i] ^= field.mul(c, root)
        poly = nxt
    if any(c not in (0, 1) for c in poly):
        raise AssertionError("minimal polynomial has non-binary coefficients")
    mask = 0
    for i, c in enumerate(poly):
        mask |= c << i
    return mask


def _poly_mul_gf2(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _poly_mod_gf2(a: int, mod: int) -> int:
    dm = mod.bit_length() - 1
    while a.bit_length() - 1 >= dm and a:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a


@lru_cache(maxsize=None)
def build_code(m: int, t: int, primitive_poly: int | None = None) -> BchCode:
    """Narrow-sense primitive BCH code with designed distance 2t + 1."""
    if not 2 <= m <= 10:
        raise ValueError("field degree m must be 2..10")
    if t < 1:
        raise ValueError("t must be >= 1")
    field = BinaryField(m, primitive_poly)
    n = field.order
    if 2 * t + 1 > n:
        raise ValueError(f"designed distance {2 * t + 1} exceeds block length {n}")
    g = 1
    seen: set[int] = set()
    for i in range(1, 2 * t + 1):
        rep = min(_coset(i, n))
        if rep in seen:
            continue
        seen.add(rep)
        g = _poly_mul_gf2(g, _minimal_polynomial(field, i))
    k = n - (g.bit_length() - 1)
    if k <= 0:
        raise ValueError(f"t={t} too large for m={m}: generator consumes the block")
    return BchCode(field=field, n=n, k=k, t=t, d_design=2 * t + 1, generator=g)


def _coset(i: int, n: int) -> list[int]:
    out = []
    e = i % n
    while e not in out:
        out.append(e)
        e = (e * 2) % n
    return out


def _bits_to_int(bits: np.ndarray) -> int:
    # bit j of the int = coefficient of x^j = bits[j]
    out = 0
    for j in np.flatnonzero(bits):
        out |= 1 << int(j)
    return out


def _int_to_bits(value: int, length: int) -> np.ndarray:
    return np.array([(value >> j) & 1 for j in range(length)], dtype=np.uint8)


def encode(code: BchCode, message: np.ndarray) -> np.ndarray:
    """Systematic encoding: message in the high n-k..n-1 positions."""
    message = np.asarray(message, dtype=np.uint8)
    if message.shape != (code.k,):
        raise ValueError(f"message must have length {code.k}")
    msg_poly = _bits_to_int(message) << code.parity_bits
    parity = _poly_mod_gf2(msg_poly, code.generator)
    cw = msg_poly ^ parity
    return _int_to_bits(cw, code.n)


def _syndromes(code: BchCode, received: np.ndarray) -> np.ndarray:
    field = code.field
    positions = np.flatnonzero(received)
    if positions.size == 0:
        return np.zeros(2 * code.t, dtype=np.int64)
    js = np.arange(1, 2 * code.t + 1, dtype=np.int64)
    exps = (js[:, None] * positions[None, :]) % field.order
    return np.bitwise_xor.reduce(field.exp[exps], axis=1)


def _berlekamp_massey(code: BchCode, synd: np.ndarray) -> tuple[np.ndarray, int]:
    """Error-locator polynomial (low degree first) and its register length L."""
    field = code.field
    exp, log = field.exp_list, field.log_list
    order = field.order
    size = 2 * code.t + 2
    c = [0] * size
    b = [0] * size
    c[0] = b[0] = 1
    s = [int(x) for x in synd]
    L = 0
    shift = 1
    b_scale_log = 0
    for r in range(2 * code.t):
        d = s[r]
        for i in range(1, L + 1):
            ci = c[i]
            si = s[r - i]
            if ci and si:
                d ^= exp[log[ci] + log[si]]
        if d == 0:
            shift += 1
            continue
        coef_log = (log[d] - b_scale_log) % order
        grow = 2 * L <= r
        prev = c[:] if grow else None
        # c ^= coef * x^shift * b
        for j in range(size - shift):
            bj = b[j]
            if bj:
                c[j + shift] ^= exp[coef_log + log[bj]]
        if grow:
            b = prev
            b_scale_log = log[d]
            L = r + 1 - L
            shift = 1
        else:
            shift += 1
    return np.array(c, dtype=np.int64), L


def _chien_search(code: BchCode, locator: np.ndarray) -> np.ndarray:
    """Error positions: i such that locator(alpha^{-i}) = 0."""
    field = code.field
    n = field.order
    nz = np.flatnonzero(locator[1:]) + 1
    acc = np.full(n, int(locator[0]), dtype=np.int64)
    if nz.size:
        e = np.arange(n, dtype=np.int64)
        exps = (field.log[locator[nz]][:, None] + nz[:, None] * e[None, :]) % n
        acc ^= np.bitwise_xor.reduce(field.exp[exps], axis=0)
    roots = np.flatnonzero(acc == 0)
    return (n - roots) % n


def decode(code: BchCode, received: np.ndarray) -> DecodeOutcome:
    """Bounded-distance decode: corrects up to t errors, else decode_failure."""
    received = np.asarray(received, dtype=np.uint8)
    if received.shape != (code.n,):
        raise ValueError(f"received word must have length {code.n}")
    synd = _syndromes(code, received)
    if not synd.any():
        return DecodeOutcome("corrected", received[code.parity_bits :].copy(), 0)
    locator, L = _berlekamp_massey(code, synd)
    degree = int(np.flatnonzero(locator)[-1]) if locator.any() else 0
    if L == 0 or L > code.t or degree != L:
        return DecodeOutcome("decode_failure", None, 0)
    positions = _chien_search(code, locator)
    if positions.size != degree:
        return DecodeOutcome("decode_failure", None, 0)
    corrected = received.copy()
    corrected[positions] ^= 1
    if _syndromes(code, corrected).any():
        return DecodeOutcome("decode_failure", None, 0)
    return DecodeOutcome("corrected", corrected[code.parity_bits :], int(degree))


def save_code(code: BchCode, path) -> None:
    desc = code_descriptor(code)
    with open(path, "w") as f:
        json.dump(desc, f)
        f.write("\n")


def code_descriptor(code: BchCode) -> dict:
    return {
        "m": code.field.m,
        "primitive_poly": code.field.poly,
        "t": code.t,
        "n": code.n,
        "k": code.k,
        "d_design": code.d_design,
        "g_hex": format(code.generator, "x"),
    }


def load_code(path) -> BchCode:
    with open(path) as f:
        desc = json.load(f)
    return code_from_descriptor(desc)


def code_from_descriptor(desc: dict) -> BchCode:
    code = build_code(desc["m"], desc["t"], desc.get("primitive_poly"))
    if format(code.generator, "x") != desc["g_hex"]:
        raise ValueError("generator polynomial mismatch in code descriptor")
    return code
