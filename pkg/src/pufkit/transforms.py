"""Orthogonal +/-1 transform construction, cataloging, and application.

Builds the family of 16x16 orthogonal sign matrices obtained by doubling
4x4 orthogonal seeds twice through the eight block constructions, and
provides the separable 2D transform used for RO-array decorrelation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SignMatrix",
    "TransformCatalog",
    "enumerate_base_matrices",
    "double",
    "build_catalog",
    "apply_2d",
    "is_orthogonal",
    "sylvester_hadamard",
    "save_catalog",
    "load_catalog",
]


@dataclass(frozen=True)
class SignMatrix:
    """Square matrix with entries in {+1, -1}."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("sign matrix must be square")
        if not np.all(np.abs(a) == 1):
            raise ValueError("entries must be +1 or -1")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def flat_key(self) -> bytes:
        """Canonical byte key: +1 encodes as 0, -1 as 1, row-major."""
        return np.packbits(self.entries.ravel() < 0).tobytes()

    def sort_key(self) -> tuple:
        # Lexicographic on flattened entries, +1 before -1.
        return tuple(int(v < 0) for v in self.entries.ravel())

    def __eq__(self, other):
        if not isinstance(other, SignMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash((self.size, self.flat_key()))


@dataclass
class TransformCatalog:
    """Deduplicated set of 16x16 orthogonal sign matrices with provenance.

    ``provenance[i]`` is the (seed_index, first_construction, second_construction)
    triple of the lexicographically-first build path that produced member ``i``.
    """

    members: list[SignMatrix]
    provenance: list[tuple[int, int, int]]
    ids: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.ids:
            self.ids = list(range(len(self.members)))

    def __len__(self) -> int:
        return len(self.members)

    def index_of(self, m: SignMatrix) -> int:
        key = m.flat_key()
        for i, member in enumerate(self.members):
            if member.flat_key() == key:
                return i
        raise KeyError("matrix not in catalog")


def is_orthogonal(a: SignMatrix) -> bool:
    """True iff A @ A.T == size * I in exact integer arithmetic."""
    m = a.entries
    k = a.size
    return np.array_equal(m @ m.T, k * np.eye(k, dtype=np.int64))


def enumerate_base_matrices() -> list[SignMatrix]:
    """All 4x4 sign matrices A with A @ A.T = 4I.

    Enumerates the 2^16 sign patterns in lexicographic order of the
    flattened entries (+1 before -1), so the result is canonical.
    """
    # Bit b of the pattern index selects the sign of entry b (MSB = entry 0),
    # 0 -> +1, 1 -> -1; ascending index order is lexicographic order.
    idx = np.arange(1 << 16, dtype=np.uint32)
    shifts = np.arange(15, -1, -1, dtype=np.uint32)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    mats = 1 - 2 * bits.astype(np.int64)
    mats = mats.reshape(-1, 4, 4)
    prods = np.einsum("nij,nkj->nik", mats, mats)
    ok = np.all(prods == 4 * np.eye(4, dtype=np.int64), axis=(1, 2))
    return [SignMatrix(m) for m in mats[ok]]


# The eight doubling block patterns, in reading order: each entry is the
# sign applied to A in the (top-left, top-right, bottom-left, bottom-right)
# blocks of the doubled matrix.
_DOUBLING_SIGNS = (
    (+1, +1, +1, -1),
    (+1, +1, -1, +1),
    (+1, -1, +1, +1),
    (-1, +1, +1, +1),
    (-1, -1, -1, +1),
    (-1, -1, +1, -1),
    (-1, +1, -1, -1),
    (+1, -1, -1, -1),
)


def double(a: SignMatrix, construction: int) -> SignMatrix:
    """Double an orthogonal sign matrix via one of the eight block patterns."""
    if not 0 <= construction <= 7:
        raise ValueError(f"construction index must be 0..7, got {construction}")
    if not is_orthogonal(a):
        raise ValueError("input matrix is not orthogonal")
    tl, tr, bl, br = _DOUBLING_SIGNS[construction]
    m = a.entries
    return SignMatrix(np.block([[tl * m, tr * m], [bl * m, br * m]]))


def sylvester_hadamard(k: int) -> SignMatrix:
    """Sylvester-construction Hadamard matrix of size k (power of 2)."""
    if k < 1 or k & (k - 1):
        raise ValueError("size must be a power of 2")
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < k:
        h = np.block([[h, h], [h, -h]])
    return SignMatrix(h)


def build_catalog() -> TransformCatalog:
    """Apply the doubling constructions twice (4 -> 8 -> 16) over all seeds.

    Exact-equal duplicates are removed; members are sorted lexicographically
    on flattened entries so ids are stable across runs.
    """
    bases = enumerate_base_matrices()
    seen: dict[bytes, tuple[np.ndarray, tuple[int, int, int]]] = {}
    for si, base in enumerate(bases):
        m = base.entries
        for c1 in range(8):
            tl, tr, bl, br = _DOUBLING_SIGNS[c1]
            m8 = np.block([[tl * m, tr * m], [bl * m, br * m]])
            for c2 in range(8):
                tl2, tr2, bl2, br2 = _DOUBLING_SIGNS[c2]
                m16 = np.block([[tl2 * m8, tr2 * m8], [bl2 * m8, br2 * m8]])
                key = np.packbits(m16.ravel() < 0).tobytes()
                if key not in seen:
                    seen[key] = (m16, (si, c1, c2))
    ordered = sorted(seen.items(), key=lambda kv: kv[0])
    members = [SignMatrix(m) for _, (m, _) in ordered]
    provenance = [prov for _, (_, prov) in ordered]
    return TransformCatalog(members=members, provenance=provenance)


def apply_2d(t: SignMatrix, x: np.ndarray) -> np.ndarray:
    """Separable 2D transform (1/k) * T @ X @ T.T with orthonormal scaling.

    T has +/-1 entries, so the accumulation is pure additions/subtractions;
    the single 1/k scale per output entry keeps the map orthonormal.
    """
    x = np.asarray(x, dtype=np.float64)
    k = t.size
    if x.shape != (k, k):
        raise ValueError(f"input shape {x.shape} does not match transform size {k}")
    tm = t.entries.astype(np.float64)
    return (tm @ x @ tm.T) / k


def save_catalog(catalog: TransformCatalog, path) -> None:
    """Serialize a catalog to JSON with '+'/'-' row strings."""
    records = []
    for i, (m, prov) in enumerate(zip(catalog.members, catalog.provenance)):
        rows = ["".join("+" if v > 0 else "-" for v in row) for row in m.entries]
        records.append(
            {
                "id": i,
                "seed_index": prov[0],
                "construction_pair": [prov[1], prov[2]],
                "rows": rows,
            }
        )
    with open(path, "w") as f:
        json.dump(records, f, indent=None, separators=(",", ":"))
        f.write("\n")


def load_catalog(path) -> TransformCatalog:
    with open(path) as f:
        records = json.load(f)
    members = []
    provenance = []
    for rec in sorted(records, key=lambda r: r["id"]):
        m = np.array(
            [[1 if ch == "+" else -1 for ch in row] for row in rec["rows"]],
            dtype=np.int64,
        )
        members.append(SignMatrix(m))
        c1, c2 = rec["construction_pair"]
        provenance.append((rec["seed_index"], c1, c2))
    return TransformCatalog(members=members, provenance=provenance)
