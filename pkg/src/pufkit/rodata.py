"""RO-array datasets: synthetic generation, CSV I/O, reliability and uniqueness.

A dataset holds D devices with M measurements each; measurement 1 is the
enrollment snapshot and measurements 2..M are noisy re-measurements.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky
from scipy.stats import norm

from .pipeline import EqualizationProfile, QuantizerSpec, BitSequence, extract_bits
from .transforms import SignMatrix

__all__ = [
    "ROArrayDataset",
    "SyntheticModel",
    "CoefficientErrorProfile",
    "generate_synthetic",
    "load_csv",
    "save_csv",
    "estimate_error_profile",
    "uniqueness",
    "randomness_smoke",
]

GRID = 16


@dataclass(frozen=True)
class ROArrayDataset:
    """arrays[d, m] is the 16x16 RO output of device d, measurement m."""

    arrays: np.ndarray  # shape (D, M, 16, 16)

    def __post_init__(self):
        a = np.asarray(self.arrays, dtype=np.float64)
        if a.ndim != 4 or a.shape[2:] != (GRID, GRID):
            raise ValueError("dataset must have shape (D, M, 16, 16)")
        if not np.all(np.isfinite(a)):
            raise ValueError("dataset contains non-finite values")
        a.setflags(write=False)
        object.__setattr__(self, "arrays", a)

    @property
    def devices(self) -> int:
        return self.arrays.shape[0]

    @property
    def measurements(self) -> int:
        return self.arrays.shape[1]


@dataclass(frozen=True)
class SyntheticModel:
    """Gaussian RO field with separable exponential spatial correlation.

    Neighbouring ROs correlate as rho^(|drow| + |dcol|); each re-measurement
    adds i.i.d. N(0, noise_std^2) per RO.
    """

    variation_std: float = 1.0
    correlation: float = 0.6
    noise_std: float = 0.05
    mean: float = 0.0

    def __post_init__(self):
        if self.variation_std <= 0:
            raise ValueError("variation_std must be positive")
        if not 0 <= self.correlation < 1:
            raise ValueError("correlation must be in [0, 1)")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


@dataclass(frozen=True)
class CoefficientErrorProfile:
    """Per-coefficient bit-error probabilities for the 255 used coefficients."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if np.any(p < 0) or np.any(p > 0.5):
            raise ValueError("error probabilities must lie in [0, 0.5]")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def p_max(self) -> float:
        return float(self.p.max())

    @property
    def p_mean(self) -> float:
        return float(self.p.mean())


def _correlation_factor(rho: float) -> np.ndarray:
    """Cholesky factor of the 16x16 kernel K[i,j] = rho^|i-j|."""
    idx = np.arange(GRID)
    kernel = rho ** np.abs(idx[:, None] - idx[None, :])
    return cholesky(kernel, lower=True)


def generate_synthetic(
    model: SyntheticModel, devices: int, measurements: int, seed: int
) -> ROArrayDataset:
    """Seeded synthetic dataset; device streams are derived from the seed by
    device index, so parallel and serial generation agree bit-exactly."""
    if devices < 1 or measurements < 1:
        raise ValueError("need at least one device and one measurement")
    factor = _correlation_factor(model.correlation)
    out = np.empty((devices, measurements, GRID, GRID))
    for d in range(devices):
        rng = np.random.default_rng([seed, d])
        z = rng.standard_normal((GRID, GRID))
        field = model.mean + model.variation_std * (factor @ z @ factor.T)
        out[d, 0] = field
        noise = rng.standard_normal((measurements - 1, GRID, GRID))
        out[d, 1:] = field + model.noise_std * noise
    return ROArrayDataset(out)


def save_csv(dataset: ROArrayDataset, path) -> None:
    """One row per (device, measurement) with 256 RO values at full precision."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["device", "measurement"] + [f"ro_{i}" for i in range(GRID * GRID)])
        for d in range(dataset.devices):
            for m in range(dataset.measurements):
                row = dataset.arrays[d, m].ravel()
                writer.writerow([d, m + 1] + [repr(float(v)) for v in row])


def load_csv(path) -> ROArrayDataset:
    expected_cols = 2 + GRID * GRID
    rows: dict[tuple[int, int], np.ndarray] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ValueError("empty file: no devices")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != expected_cols:
                raise ValueError(
                    f"line {lineno}: expected {expected_cols} columns, got {len(row)}"
                )
            try:
                d, m = int(row[0]), int(row[1])
                values = np.array([float(v) for v in row[2:]])
            except ValueError as e:
                raise ValueError(f"line {lineno}: malformed row: {e}") from None
            rows[(d, m)] = values.reshape(GRID, GRID)
    if not rows:
        raise ValueError("no devices in file")
    device_ids = sorted({d for d, _ in rows})
    meas_ids = sorted({m for _, m in rows})
    for d in device_ids:
        for m in meas_ids:
            if (d, m) not in rows:
                raise ValueError(f"missing measurement {m} for device {d}")
    out = np.array([[rows[(d, m)] for m in meas_ids] for d in device_ids])
    return ROArrayDataset(out)


def estimate_error_profile(
    dataset: ROArrayDataset,
    t: SignMatrix,
    profile: EqualizationProfile,
    q: QuantizerSpec,
) -> CoefficientErrorProfile:
    """Empirical disagreement rate between enrollment and re-measurement bits.

    One bit per coefficient (K = 1): p_i is the fraction of (device,
    re-measurement) pairs whose bit at coefficient i flips.
    """
    if dataset.measurements < 2:
        raise ValueError("error estimation needs at least 2 measurements")
    if q.bits != 1:
        raise ValueError("error profile is defined for 1-bit quantization")
    flips = np.zeros(GRID * GRID - 1)
    total = 0
    for d in range(dataset.devices):
        enrolled = extract_bits(dataset.arrays[d, 0], t, profile, q).bits
        for m in range(1, dataset.measurements):
            noisy = extract_bits(dataset.arrays[d, m], t, profile, q).bits
            flips += enrolled ^ noisy
            total += 1
    return CoefficientErrorProfile(np.minimum(flips / total, 0.5))


def uniqueness(bitseqs: list[BitSequence]) -> tuple[float, float]:
    """Mean and variance of pairwise fractional Hamming distance."""
    if len(bitseqs) < 2:
        raise ValueError("uniqueness needs at least 2 sequences")
    n = len(bitseqs[0])
    if any(len(b) != n for b in bitseqs):
        raise ValueError("length mismatch between sequences")
    mat = np.stack([b.bits for b in bitseqs]).astype(np.int64)
    # Pairwise HD via dot products: hd = w_i + w_j - 2 * (b_i . b_j).
    gram = mat @ mat.T
    w = np.diag(gram)
    hd = (w[:, None] + w[None, :] - 2 * gram) / n
    iu = np.triu_indices(len(bitseqs), k=1)
    dists = hd[iu]
    return float(dists.mean()), float(dists.var())


def randomness_smoke(bits: BitSequence, level: float = 0.01) -> dict:
    """Monobit and runs z-tests with two-sided normal thresholds."""
    n = len(bits)
    if n < 100:
        raise ValueError("sequence too short for randomness tests (need >= 100)")
    b = bits.bits.astype(np.float64)
    ones = b.sum()
    z_mono = (2 * ones - n) / np.sqrt(n)
    pi = ones / n
    runs = 1 + int(np.count_nonzero(np.diff(bits.bits)))
    if pi in (0.0, 1.0):
        z_runs = np.inf
    else:
        z_runs = (runs - 2 * n * pi * (1 - pi)) / (2 * np.sqrt(n) * pi * (1 - pi))
    threshold = norm.isf(level / 2)
    return {
        "monobit_z": float(z_mono),
        "runs_z": float(z_runs),
        "monobit_pass": bool(abs(z_mono) < threshold),
        "runs_pass": bool(abs(z_runs) < threshold),
        "level": level,
    }
