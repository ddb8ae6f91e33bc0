import numpy as np
import pytest

from uisearch.errors import DimensionMismatch, EmptyIndex, FrozenIndexError, IndexFormatError
from uisearch.index import (
    EmbeddingIndex,
    euclidean,
    load_index,
    query,
    save_index,
)


def build(vectors, ids=None):
    index = EmbeddingIndex(dim=len(vectors[0]) if vectors else 1)
    for i, v in enumerate(vectors):
        index.add(ids[i] if ids else f"v{i:04d}", np.asarray(v))
    return index.freeze()


class TestEuclidean:
    def test_identical_vectors(self):
        v = np.arange(5.0)
        assert euclidean(v, v) == 0.0

    def test_three_four_five(self):
        assert euclidean(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 5.0

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a, b = rng.random(32), rng.random(32)
        assert euclidean(a, b) == euclidean(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            euclidean(np.zeros(3), np.zeros(4))


class TestEmbeddingIndex:
    def test_empty_frozen_index(self):
        index = EmbeddingIndex(4).freeze()
        assert len(index) == 0 and index.frozen

    def test_add_after_freeze_rejected(self):
        index = EmbeddingIndex(2).freeze()
        with pytest.raises(FrozenIndexError):
            index.add("x", np.zeros(2))

    def test_duplicate_id_rejected(self):
        index = EmbeddingIndex(2)
        index.add("a", np.zeros(2))
        with pytest.raises(FrozenIndexError):
            index.add("a", np.ones(2))

    def test_wrong_dim_rejected(self):
        index = EmbeddingIndex(3)
        with pytest.raises(DimensionMismatch):
            index.add("a", np.zeros(4))


def brute_force(index, z, k, exclude=None):
    """Independent oracle: full sort of (distance, id) pairs."""
    pairs = []
    for lid in index.ids:
        if lid == exclude:
            continue
        pairs.append((euclidean(index.vector(lid), z), lid))
    pairs.sort()
    return pairs[:k]


class TestQuery:
    def test_self_query_rank_one(self):
        rng = np.random.default_rng(1)
        vectors = rng.random((5, 8)).astype(np.float32)
        index = build(vectors)
        result = query(index, vectors[2], k=3)
        assert result.entries[0][0] == "v0002"
        assert result.entries[0][1] == 0.0

    def test_k_larger_than_index(self):
        index = build(np.eye(3, dtype=np.float32))
        result = query(index, np.zeros(3), k=10)
        assert len(result) == 3

    def test_exclude_omits_id(self):
        vectors = np.eye(4, dtype=np.float32)
        index = build(vectors)
        result = query(index, vectors[1], k=4, exclude="v0001")
        assert "v0001" not in result.ids()

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        vectors = rng.standard_normal((200, 24)).astype(np.float32)
        index = build(vectors)
        for qi in (0, 17, 63):
            z = vectors[qi] + rng.standard_normal(24).astype(np.float32) * 0.01
            for k in (1, 5, 10):
                got = query(index, z, k)
                want = brute_force(index, z, k)
                assert got.ids() == [lid for _, lid in want]
                for (lid, d), (wd, wlid) in zip(got.entries, want):
                    assert abs(d - wd) < 1e-12

    def test_tie_order_ascending_id(self):
        # four identical vectors: all distances tie, ids decide the order
        vectors = [np.ones(3, dtype=np.float32)] * 4
        index = build(vectors, ids=["d", "b", "a", "c"])
        result = query(index, np.ones(3), k=4)
        assert result.ids() == ["a", "b", "c", "d"]

    def test_monotone_in_k(self):
        rng = np.random.default_rng(3)
        vectors = rng.random((50, 6)).astype(np.float32)
        index = build(vectors)
        z = rng.random(6)
        small = query(index, z, 5)
        large = query(index, z, 20)
        assert large.entries[:5] == small.entries

    def test_empty_index_rejected(self):
        index = EmbeddingIndex(3).freeze()
        with pytest.raises(EmptyIndex):
            query(index, np.zeros(3), 1)

    def test_dim_mismatch_rejected(self):
        index = build(np.eye(3, dtype=np.float32))
        with pytest.raises(DimensionMismatch):
            query(index, np.zeros(5), 1)

    def test_distances_non_decreasing(self):
        rng = np.random.default_rng(4)
        index = build(rng.random((30, 7)).astype(np.float32))
        result = query(index, rng.random(7), 30)
        distances = [d for _, d in result.entries]
        assert distances == sorted(distances)


class TestIndexFile:
    def test_round_trip_identity(self, tmp_path):
        rng = np.random.default_rng(5)
        index = build(rng.standard_normal((20, 16)).astype(np.float32))
        path = tmp_path / "test.uidx"
        save_index(index, path)
        loaded = load_index(path)
        assert loaded.ids == index.ids
        assert loaded.dim == index.dim
        np.testing.assert_array_equal(loaded._matrix, index._matrix)

    def test_save_is_deterministic(self, tmp_path):
        rng = np.random.default_rng(6)
        index = build(rng.random((5, 4)).astype(np.float32))
        p1, p2 = tmp_path / "a.uidx", tmp_path / "b.uidx"
        save_index(index, p1)
        save_index(index, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_unicode_ids_survive(self, tmp_path):
        index = EmbeddingIndex(2)
        index.add("écran_01", np.zeros(2))
        index.freeze()
        path = tmp_path / "u.uidx"
        save_index(index, path)
        assert load_index(path).ids == ("écran_01",)

    def test_corrupt_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.uidx"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(IndexFormatError):
            load_index(path)

    def test_truncated_rejected(self, tmp_path):
        rng = np.random.default_rng(7)
        index = build(rng.random((3, 4)).astype(np.float32))
        path = tmp_path / "t.uidx"
        save_index(index, path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])
        with pytest.raises(IndexFormatError):
            load_index(path)

    def test_unfrozen_save_rejected(self, tmp_path):
        index = EmbeddingIndex(2)
        index.add("a", np.zeros(2))
        with pytest.raises(FrozenIndexError):
            save_index(index, tmp_path / "x.uidx")
