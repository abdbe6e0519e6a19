"""Analytic engine: Poisson-binomial tails, code-design bounds, rate regions.

Block-error probabilities are evaluated two independent ways (DFT of the
characteristic function, and direct PMF convolution); the convolution value
is authoritative in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .pipeline import fit_equalization
from .rodata import CoefficientErrorProfile, ROArrayDataset, estimate_error_profile
from .transforms import TransformCatalog

__all__ = [
    "RatePoint",
    "RegionBoundary",
    "binary_entropy",
    "block_error_probability_dftcf",
    "block_error_probability_dp",
    "required_min_distance",
    "gv_dimension",
    "fcs_region",
    "cs_region_mgl",
    "finite_length_point",
    "select_transform",
    "qfunc_inv",
]


@dataclass(frozen=True)
class RatePoint:
    secret_key_rate: float
    privacy_leakage_rate: float


@dataclass(frozen=True)
class RegionBoundary:
    points: list[RatePoint]
    kind: str  # "FCS" | "CS"


def binary_entropy(p: float) -> float:
    """Base-2 binary entropy; endpoints return 0 by continuity."""
    if not 0 <= p <= 1:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def qfunc_inv(u: float) -> float:
    """Inverse Gaussian tail function Qinv(u)."""
    if not 0 < u < 1:
        raise ValueError("argument must be in (0, 1)")
    return float(-ndtri(u))


def _check_probs(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must be a 1D array with values in [0, 1]")
    return p


def block_error_probability_dftcf(p: np.ndarray, t: int) -> float:
    """P[K > t] for K = sum of independent Bernoulli(p_i), via the DFT of
    the characteristic function evaluated at the (N+1)-th roots of unity."""
    p = _check_probs(p)
    n = p.size
    if not 0 <= t <= n:
        raise ValueError("t must be in [0, len(p)]")
    ell = np.arange(n + 1)
    omega = np.exp(2j * np.pi * ell / (n + 1))
    # Characteristic values x_l = prod_j (1 - p_j + p_j * omega^l)
    x = np.prod(1 - p[None, :] + p[None, :] * omega[:, None], axis=1)
    pmf = np.real(np.fft.fft(x)) / (n + 1)
    tail = float(pmf[t + 1 :].sum())
    return min(max(tail, 0.0), 1.0)


def block_error_probability_dp(p: np.ndarray, t: int) -> float:
    """Exact Poisson-binomial tail P[K > t] by PMF convolution (the oracle)."""
    p = _check_probs(p)
    n = p.size
    if not 0 <= t <= n:
        raise ValueError("t must be in [0, len(p)]")
    pmf = np.zeros(n + 1)
    pmf[0] = 1.0
    for i, pi in enumerate(p):
        upper = i + 2
        nxt = np.zeros_like(pmf)
        nxt[:upper] = pmf[:upper] * (1 - pi)
        nxt[1:upper] += pmf[: upper - 1] * pi
        pmf = nxt
    # Summing the (non-negative) upper tail avoids cancellation for tiny tails.
    return min(max(float(pmf[t + 1 :].sum()), 0.0), 1.0)


def _binomial_tail(n: int, p: float, t: int) -> float:
    """P[Bin(n, p) > t] with exact integer binomial coefficients."""
    if p == 0:
        return 0.0
    total = 0.0
    for j in range(t + 1, n + 1):
        total += math.comb(n, j) * (p**j) * ((1 - p) ** (n - j))
    return min(total, 1.0)


def required_min_distance(n: int, p_max: float, target: float) -> int:
    """Smallest odd d = 2t + 1 with binomial tail P[Bin(n, p_max) > t] <= target."""
    if not 0 < p_max < 0.5:
        raise ValueError("p_max must be in (0, 0.5)")
    if not 0 < target <= 1:
        raise ValueError("target must be in (0, 1]")
    for t in range(n + 1):
        if _binomial_tail(n, p_max, t) <= target:
            return 2 * t + 1
    raise ValueError("no feasible minimum distance up to n")


def gv_dimension(n: int, d: int) -> int:
    """Largest dimension guaranteed by the Gilbert-Varshamov bound, exactly:
    k = n - ceil(log2(sum_{j=0}^{d-1} C(n, j))), in integer arithmetic."""
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    total = sum(math.comb(n, j) for j in range(d))
    bits = total.bit_length()
    ceil_log2 = bits - 1 if total == 1 << (bits - 1) else bits
    return n - ceil_log2


def fcs_region(p: float, grid: int = 1024) -> RegionBoundary:
    """Boundary of the fuzzy-commitment rate region for a BSC(p) source:
    R_s in [0, 1 - H_b(p)] with R_ell = 1 - R_s."""
    if not 0 <= p <= 0.5:
        raise ValueError("p must be in [0, 0.5]")
    rs_max = 1 - binary_entropy(p)
    rs = np.linspace(0.0, rs_max, grid)
    points = [RatePoint(float(r), float(1 - r)) for r in rs]
    return RegionBoundary(points=points, kind="FCS")


def cs_region_mgl(p: float, grid: int = 1024) -> RegionBoundary:
    """Chosen-secret region boundary via the optimal binary test channel.

    Sweeps the BSC(alpha) auxiliary channel; each point is
    (1 - H_b(alpha * p), H_b(alpha * p) - H_b(alpha)) with * the binary
    convolution alpha(1-p) + (1-alpha)p.
    """
    if not 0 < p < 0.5:
        raise ValueError("p must be in (0, 0.5)")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    points = []
    for alpha in np.linspace(0.0, 0.5, grid):
        conv = alpha * (1 - p) + (1 - alpha) * p
        rs = 1 - binary_entropy(conv)
        rl = binary_entropy(conv) - binary_entropy(alpha)
        points.append(RatePoint(float(rs), float(rl)))
    points.sort(key=lambda q: q.secret_key_rate)
    return RegionBoundary(points=points, kind="CS")


def finite_length_point(n: int, p: float, eps: float) -> RatePoint:
    """Normal-approximation finite-blocklength operating point:
    R_s = 1 - H_b(p) - sqrt(V/n) * Qinv(eps) + log2(n)/(2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < p < 0.5:
        raise ValueError("p must be in (0, 0.5)")
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    v = p * (1 - p) * math.log2((1 - p) / p) ** 2
    rs = 1 - binary_entropy(p) - math.sqrt(v / n) * qfunc_inv(eps) + math.log2(n) / (2 * n)
    return RatePoint(float(rs), float(1 - rs))


def _batch_error_profiles(
    members: np.ndarray, arrays: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized 1-bit error profiles for a block of transforms.

    members: (B, 16, 16) sign matrices; arrays: (D, M, 16, 16).
    Returns (p, stats) with p of shape (B, 255). Matches
    fit_equalization + estimate_error_profile with K = 1 exactly.
    """
    b, k, _ = members.shape
    d, m = arrays.shape[:2]
    tm = members.astype(np.float64)
    # coeffs[b, d, m] = (1/k) T_b X_{d,m} T_b^T
    coeffs = np.einsum("bij,dmjl,bkl->bdmik", tm, arrays, tm, optimize=True) / k
    flat = coeffs.reshape(b, d, m, k * k)
    enroll = flat[:, :, 0, :]
    mean = enroll.mean(axis=1)  # (B, k^2)
    std = enroll.std(axis=1, ddof=1)
    # 1-bit extraction: bit = 1{(value - mean) / std > 0} = 1{value > mean}
    bits = flat > mean[:, None, None, :]
    disagree = bits[:, :, 1:, :] ^ bits[:, :, :1, :]
    p = disagree.reshape(b, d * (m - 1), k * k).mean(axis=1)[:, 1:]
    return p, std


def select_transform(
    catalog: TransformCatalog,
    dataset: ROArrayDataset,
    q,
    subset: list[int] | None = None,
    block: int = 256,
) -> tuple[int, CoefficientErrorProfile]:
    """Member minimizing the max per-coefficient bit-error probability.

    Ties break on smaller mean error probability, then smaller id. ``subset``
    restricts the search to the given member ids (full catalog otherwise).
    """
    if len(catalog) == 0:
        raise ValueError("empty catalog")
    if dataset.measurements < 2:
        raise ValueError("selection needs at least 2 measurements per device")
    if q.bits != 1:
        raise ValueError("selection uses 1-bit extraction")
    ids = list(subset) if subset is not None else list(range(len(catalog)))
    arrays = dataset.arrays
    best: tuple[float, float, int] | None = None
    best_p = None
    for start in range(0, len(ids), block):
        chunk = ids[start : start + block]
        mats = np.stack([catalog.members[i].entries for i in chunk])
        p, std = _batch_error_profiles(mats, arrays)
        if np.any(std[:, 1:] == 0):
            raise ValueError("zero-variance coefficient during selection")
        for row, member_id in enumerate(chunk):
            key = (float(p[row].max()), float(p[row].mean()), member_id)
            if best is None or key < best:
                best = key
                best_p = p[row]
    return best[2], CoefficientErrorProfile(np.minimum(best_p, 0.5))


def profile_for_member(
    catalog: TransformCatalog, member_id: int, dataset: ROArrayDataset, q
) -> CoefficientErrorProfile:
    """Error profile of a single catalog member via the reference path."""
    t = catalog.members[member_id]
    eq = fit_equalization(dataset, t)
    return estimate_error_profile(dataset, t, eq, q)
