"""Bit extraction: transform, histogram equalization, quantization, Gray mapping.

Turns one 16x16 RO measurement into a binary sequence. The DC coefficient
(array average) is excluded because an attacker can predict it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .transforms import SignMatrix, apply_2d

__all__ = [
    "EqualizationProfile",
    "QuantizerSpec",
    "BitSequence",
    "quantizer_boundaries",
    "fit_equalization",
    "extract_bits",
    "gray_encode",
    "save_profile",
    "load_profile",
]


@dataclass(frozen=True)
class EqualizationProfile:
    """Per-coefficient mean and std used to standardize transform outputs."""

    mean: np.ndarray  # length k*k, row-major coefficient order
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean/std must be 1D arrays of equal length")
        # DC (index 0) is never used, so only the remaining stds must be positive.
        if np.any(std[1:] <= 0):
            raise ValueError("zero or negative std for a used coefficient")
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def count(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class QuantizerSpec:
    """K-bit quantizer with Gaussian-equiprobable cell boundaries."""

    bits: int
    boundaries: np.ndarray  # 2^K + 1 values, b_0 = -inf, b_{2^K} = +inf

    @property
    def cells(self) -> int:
        return 1 << self.bits


@dataclass(frozen=True)
class BitSequence:
    bits: np.ndarray  # values in {0, 1}, dtype uint8

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 1 or not np.all(b <= 1):
            raise ValueError("bits must be a 1D 0/1 array")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    def __len__(self) -> int:
        return self.bits.shape[0]

    def __xor__(self, other: "BitSequence") -> "BitSequence":
        if len(self) != len(other):
            raise ValueError("length mismatch")
        return BitSequence(self.bits ^ other.bits)


def quantizer_boundaries(bits: int) -> QuantizerSpec:
    """Boundaries b_j = Qinv(1 - j/2^K) of the K-bit equiprobable quantizer.

    Qinv is the inverse Gaussian tail function; the boundaries are exactly
    antisymmetric about zero by construction.
    """
    if not 1 <= bits <= 8:
        raise ValueError(f"bits per coefficient must be 1..8, got {bits}")
    cells = 1 << bits
    b = np.empty(cells + 1)
    b[0] = -np.inf
    b[cells] = np.inf
    # Qinv(1 - j/2^K) = ndtri(j/2^K); fill the lower half and mirror.
    for j in range(1, cells // 2 + 1):
        b[j] = ndtri(j / cells)
        b[cells - j] = -b[j]
    b[cells // 2] = 0.0
    return QuantizerSpec(bits=bits, boundaries=b)


def gray_encode(index: int, bits: int) -> np.ndarray:
    """Reflected binary Gray code of ``index`` as ``bits`` bits, MSB first."""
    if not 0 <= index < (1 << bits):
        raise ValueError(f"index {index} out of range for {bits} bits")
    g = index ^ (index >> 1)
    return np.array([(g >> (bits - 1 - i)) & 1 for i in range(bits)], dtype=np.uint8)


def _gray_table(bits: int) -> np.ndarray:
    """All 2^K Gray codewords as a (2^K, K) bit matrix."""
    return np.stack([gray_encode(i, bits) for i in range(1 << bits)])


def fit_equalization(dataset, t: SignMatrix) -> EqualizationProfile:
    """Per-coefficient sample mean/std of transform outputs across devices.

    Uses the first (enrollment) measurement of every device. Raises if a
    non-DC coefficient has zero sample variance.
    """
    arrays = dataset.arrays
    if arrays.shape[0] < 2:
        raise ValueError("equalization needs at least 2 devices")
    coeffs = np.array([apply_2d(t, arrays[d, 0]) for d in range(arrays.shape[0])])
    flat = coeffs.reshape(arrays.shape[0], -1)
    mean = flat.mean(axis=0)
    std = flat.std(axis=0, ddof=1)
    zero = np.flatnonzero(std[1:] == 0)
    if zero.size:
        raise ValueError(f"zero variance at coefficient index {zero[0] + 1}")
    return EqualizationProfile(mean=mean, std=std)


def extract_bits(
    x: np.ndarray,
    t: SignMatrix,
    profile: EqualizationProfile,
    q: QuantizerSpec,
) -> BitSequence:
    """Extract (k^2 - 1) * K bits from one measurement, DC excluded.

    Coefficients are standardized with the fitted profile, quantized to the
    cell j with b_j < value <= b_{j+1}, Gray-encoded, and concatenated in
    row-major coefficient order.
    """
    k = t.size
    if profile.count != k * k:
        raise ValueError("profile length does not match transform size")
    coeffs = apply_2d(t, x).ravel()
    z = (coeffs[1:] - profile.mean[1:]) / profile.std[1:]
    inner = q.boundaries[1:-1]
    # searchsorted 'left' counts boundaries strictly below z: left-open cells.
    cells = np.searchsorted(inner, z, side="left")
    return BitSequence(_gray_table(q.bits)[cells].ravel())


def save_profile(profile: EqualizationProfile, path) -> None:
    records = [
        {"index": i, "mean": float(m), "std": float(s)}
        for i, (m, s) in enumerate(zip(profile.mean, profile.std))
    ]
    with open(path, "w") as f:
        json.dump(records, f)
        f.write("\n")


def load_profile(path) -> EqualizationProfile:
    with open(path) as f:
        records = json.load(f)
    records.sort(key=lambda r: r["index"])
    mean = np.array([r["mean"] for r in records])
    std = np.array([r["std"] for r in records])
    return EqualizationProfile(mean=mean, std=std)
