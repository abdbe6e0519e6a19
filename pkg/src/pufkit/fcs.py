"""Fuzzy commitment: XOR key binding over a linear code.

Enrollment publishes w = encode(s) ^ x; reconstruction decodes w ^ y.
The helper data is a uniform mask of the codeword, so it leaks nothing
about the key when x is uniform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bch import BchCode, DecodeOutcome, code_descriptor, code_from_descriptor, decode, encode
from .pipeline import BitSequence
from .rodata import CoefficientErrorProfile, ROArrayDataset

__all__ = [
    "SecretKey",
    "HelperData",
    "enroll",
    "reconstruct",
    "simulate",
    "leakage_rates",
    "save_helper",
    "load_helper",
]


@dataclass(frozen=True)
class SecretKey:
    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    def hex(self) -> str:
        return np.packbits(self.bits).tobytes().hex()

    def __eq__(self, other):
        if not isinstance(other, SecretKey):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())


@dataclass(frozen=True)
class HelperData:
    w: np.ndarray  # n bits
    code_descriptor: dict
    transform_id: int | None = None
    profile_ref: str | None = None


def enroll(code: BchCode, s: SecretKey, x: BitSequence, **meta) -> HelperData:
    """Helper data w = encode(s) ^ x."""
    if s.bits.shape != (code.k,):
        raise ValueError(f"key must have length {code.k}")
    if len(x) != code.n:
        raise ValueError(f"source sequence must have length {code.n}")
    w = encode(code, s.bits) ^ x.bits
    return HelperData(w=w, code_descriptor=code_descriptor(code), **meta)


def reconstruct(code: BchCode, y: BitSequence, helper: HelperData) -> SecretKey | None:
    """Decode w ^ y; returns the key estimate, or None on decode failure."""
    if len(y) != code.n:
        raise ValueError(f"noisy sequence must have length {code.n}")
    outcome: DecodeOutcome = decode(code, helper.w ^ y.bits)
    if not outcome.ok:
        return None
    return SecretKey(outcome.message)


def leakage_rates(code: BchCode) -> dict:
    """Secret-key and privacy-leakage rates of the FCS with this linear code.

    For uniform x, I(x; w) = n - k bits, so R_s = k/n and R_ell = (n-k)/n.
    """
    return {
        "secret_key_rate": code.k / code.n,
        "privacy_leakage_rate": (code.n - code.k) / code.n,
        "secret_key_rate_rational": f"{code.k}/{code.n}",
        "privacy_leakage_rate_rational": f"{code.n - code.k}/{code.n}",
    }


def _wilson(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def simulate(
    code: BchCode,
    source,
    trials: int,
    seed: int,
) -> dict:
    """Monte-Carlo enrollment/reconstruction over random keys and errors.

    ``source`` is either a CoefficientErrorProfile (independent Bernoulli(p_i)
    errors, profile length must equal n) or an ROArrayDataset-derived error
    sampler: a (pairs, n) 0/1 matrix of observed error vectors to draw from.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(source, CoefficientErrorProfile):
        p = source.p
        if p.shape != (code.n,):
            raise ValueError(f"profile length {p.shape[0]} != code length {code.n}")
        draw = lambda: (rng.random(code.n) < p).astype(np.uint8)
    elif isinstance(source, np.ndarray) and source.ndim == 2:
        if source.shape[1] != code.n:
            raise ValueError("error-vector matrix width must equal code length")
        pool = source.astype(np.uint8)
        draw = lambda: pool[rng.integers(0, pool.shape[0])]
    else:
        raise ValueError("source must be a CoefficientErrorProfile or an error matrix")

    failures = 0
    wrong = 0
    for _ in range(trials):
        s = SecretKey(rng.integers(0, 2, code.k, dtype=np.uint8))
        x = BitSequence(rng.integers(0, 2, code.n, dtype=np.uint8))
        helper = enroll(code, s, x)
        y = BitSequence(x.bits ^ draw())
        est = reconstruct(code, y, helper)
        if est is None:
            failures += 1
        elif est != s:
            wrong += 1
    block_errors = failures + wrong
    return {
        "trials": trials,
        "block_error_rate": block_errors / trials,
        "block_error_wilson": _wilson(block_errors, trials),
        "decode_failure_rate": failures / trials,
        "wrong_key_rate": wrong / trials,
        "seed": seed,
    }


def error_vectors_from_dataset(dataset: ROArrayDataset, t, profile, q) -> np.ndarray:
    """Observed error vectors: enrollment bits XOR each re-measurement's bits."""
    from .pipeline import extract_bits

    if dataset.measurements < 2:
        raise ValueError("dataset mode needs at least 2 measurements")
    rows = []
    for d in range(dataset.devices):
        enrolled = extract_bits(dataset.arrays[d, 0], t, profile, q).bits
        for m in range(1, dataset.measurements):
            rows.append(enrolled ^ extract_bits(dataset.arrays[d, m], t, profile, q).bits)
    return np.stack(rows)


def save_helper(helper: HelperData, path) -> None:
    obj = {
        "w_hex": np.packbits(helper.w).tobytes().hex(),
        "n": int(helper.w.shape[0]),
        "code_descriptor": helper.code_descriptor,
        "transform_id": helper.transform_id,
        "profile_ref": helper.profile_ref,
    }
    with open(path, "w") as f:
        json.dump(obj, f)
        f.write("\n")


def load_helper(path) -> HelperData:
    with open(path) as f:
        obj = json.load(f)
    w = np.unpackbits(np.frombuffer(bytes.fromhex(obj["w_hex"]), dtype=np.uint8))[: obj["n"]]
    return HelperData(
        w=w.astype(np.uint8),
        code_descriptor=obj["code_descriptor"],
        transform_id=obj["transform_id"],
        profile_ref=obj["profile_ref"],
    )


def load_helper_code(helper: HelperData) -> BchCode:
    return code_from_descriptor(helper.code_descriptor)
