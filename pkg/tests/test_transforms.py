import json

import numpy as np
import pytest

from pufkit import transforms as tf


def brute_orthogonal(entries: np.ndarray) -> bool:
    """Independent integer product check, no shortcuts."""
    m = entries.astype(object)
    k = len(m)
    for i in range(k):
        for j in range(k):
            dot = sum(int(m[i][a]) * int(m[j][a]) for a in range(k))
            if dot != (k if i == j else 0):
                return False
    return True


class TestEnumerateBase:
    def test_contains_h4(self, base_matrices):
        h4 = tf.sylvester_hadamard(4)
        assert any(b == h4 for b in base_matrices)

    def test_count_768(self, base_matrices):
        # Frozen from the exhaustive oracle over all 65536 sign patterns.
        assert len(base_matrices) == 768

    def test_exhaustive_oracle_agrees(self, base_matrices):
        # Independent recount with the brute-force predicate on a stratified
        # sample of patterns plus all claimed members.
        for b in base_matrices[::97]:
            assert brute_orthogonal(b.entries)
        rng = np.random.default_rng(5)
        member_keys = {b.flat_key() for b in base_matrices}
        for _ in range(200):
            bits = rng.integers(0, 2, 16)
            m = (1 - 2 * bits).reshape(4, 4).astype(np.int64)
            sm = tf.SignMatrix(m)
            assert (sm.flat_key() in member_keys) == brute_orthogonal(m)

    def test_canonical_order(self, base_matrices):
        keys = [b.sort_key() for b in base_matrices]
        assert keys == sorted(keys)


class TestDouble:
    def test_trivial_seed(self):
        one = tf.SignMatrix(np.array([[1]]))
        out = tf.double(one, 0)
        assert np.array_equal(out.entries, [[1, 1], [1, -1]])

    def test_sylvester_roundtrip(self):
        h4 = tf.sylvester_hadamard(4)
        h16 = tf.double(tf.double(h4, 0), 0)
        assert h16 == tf.sylvester_hadamard(16)

    def test_all_constructions_preserve_orthogonality(self, base_matrices):
        for b in base_matrices[::31]:
            for c in range(8):
                out = tf.double(b, c)
                assert tf.is_orthogonal(out)
                assert out.size == 8

    def test_rejects_non_orthogonal(self):
        bad = tf.SignMatrix(np.ones((4, 4), dtype=np.int64))
        with pytest.raises(ValueError):
            tf.double(bad, 0)

    def test_rejects_bad_construction_index(self):
        h4 = tf.sylvester_hadamard(4)
        with pytest.raises(ValueError):
            tf.double(h4, 8)


class TestCatalog:
    def test_count_12288(self, catalog):
        assert len(catalog) == 12288

    def test_contains_dwht(self, catalog, h16):
        assert catalog.index_of(h16) >= 0

    def test_all_members_orthogonal(self, catalog):
        mats = np.stack([m.entries for m in catalog.members])
        prods = np.einsum("nij,nkj->nik", mats, mats)
        assert np.array_equal(prods, np.broadcast_to(16 * np.eye(16, dtype=np.int64), prods.shape))

    def test_no_duplicates_sort_unique_oracle(self, catalog):
        keys = sorted(m.flat_key() for m in catalog.members)
        assert all(a != b for a, b in zip(keys, keys[1:]))

    def test_raw_count_ratio(self, base_matrices):
        # 768 * 8 * 8 = 49152 raw builds collapse 4:1 under exact dedup.
        raw = set()
        for si, base in enumerate(base_matrices):
            for c1 in range(8):
                m8 = tf.double(base, c1)
                for c2 in range(8):
                    raw.add(tf.double(m8, c2).flat_key())
        assert len(base_matrices) * 64 == 49152
        assert len(raw) == 12288

    def test_provenance_rebuilds_member(self, catalog, base_matrices):
        rng = np.random.default_rng(2)
        for i in rng.integers(0, len(catalog), 20):
            si, c1, c2 = catalog.provenance[i]
            rebuilt = tf.double(tf.double(base_matrices[si], c1), c2)
            assert rebuilt == catalog.members[i]

    def test_serialization_roundtrip(self, catalog, tmp_path):
        path = tmp_path / "catalog.json"
        tf.save_catalog(catalog, path)
        loaded = tf.load_catalog(path)
        assert len(loaded) == len(catalog)
        assert all(a == b for a, b in zip(loaded.members, catalog.members))
        assert loaded.provenance == catalog.provenance

    def test_serialized_rows_are_sign_strings(self, catalog, tmp_path):
        path = tmp_path / "catalog.json"
        tf.save_catalog(catalog, path)
        records = json.loads(path.read_text())
        assert records[0].keys() == {"id", "seed_index", "construction_pair", "rows"}
        assert set("".join(records[0]["rows"])) <= {"+", "-"}


class TestApply2d:
    def test_zero_input(self, h16):
        out = tf.apply_2d(h16, np.zeros((16, 16)))
        assert np.array_equal(out, np.zeros((16, 16)))

    def test_h2_hand_example(self):
        h2 = tf.SignMatrix(np.array([[1, 1], [1, -1]]))
        x = np.array([[1.0, 0.0], [0.0, 0.0]])
        out = tf.apply_2d(h2, x)
        assert np.allclose(out, 0.5 * np.ones((2, 2)), atol=1e-15)

    def test_frobenius_preserved(self, catalog):
        rng = np.random.default_rng(3)
        for _ in range(20):
            t = catalog.members[rng.integers(0, len(catalog))]
            x = rng.standard_normal((16, 16))
            out = tf.apply_2d(t, x)
            assert abs(np.linalg.norm(out) - np.linalg.norm(x)) < 1e-12

    def test_white_variance_preserved(self, h16):
        rng = np.random.default_rng(4)
        sigma = 1.7
        draws = np.array([tf.apply_2d(h16, sigma * rng.standard_normal((16, 16))) for _ in range(10_000)])
        var = draws.reshape(-1, 256).var(axis=0)
        assert np.all(np.abs(var - sigma**2) < 0.05 * sigma**2)

    def test_size_mismatch(self, h16):
        with pytest.raises(ValueError):
            tf.apply_2d(h16, np.zeros((8, 8)))


class TestIsOrthogonal:
    def test_repeated_rows(self):
        m = tf.SignMatrix(np.tile([1, -1, 1, -1], (4, 1)))
        assert not tf.is_orthogonal(m)

    def test_h4(self):
        assert tf.is_orthogonal(tf.sylvester_hadamard(4))

    def test_single_flip_breaks(self):
        h4 = tf.sylvester_hadamard(4).entries.copy()
        h4[2, 3] *= -1
        assert not tf.is_orthogonal(tf.SignMatrix(h4))
        assert not brute_orthogonal(h4)
