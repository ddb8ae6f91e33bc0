"""Embedding storage and exact Euclidean top-K retrieval.

The index is an ordered id -> vector store. Queries are exact linear scans:
corpus sizes here are small enough that approximate structures would only
add failure modes. Results are ranked by distance with ties broken by
ascending id, which makes rankings reproducible across platforms.

Index file layout (all integers little-endian):

    magic   4 bytes  b"UIDX"
    version u32
    d       u32      embedding dimension
    n       u32      entry count
    then n records:  u16 id byte-length, id UTF-8 bytes, d float32 LE values
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyIndex,
    FrozenIndexError,
    IndexFormatError,
)
from .net import ImageAutoencoder, LabelNet, embed
from .voc import Corpus

MAGIC = b"UIDX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RankedResult:
    """Top-K retrieval outcome: (id, distance) pairs, distances non-decreasing."""

    entries: tuple[tuple[str, float], ...]
    query_id: str | None = None

    def ids(self) -> list[str]:
        return [i for i, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


class EmbeddingIndex:
    """Ordered id -> vector store; immutable once frozen."""

    def __init__(self, dim: int):
        if dim <= 0:
            raise DimensionMismatch(f"dimension must be positive, got {dim}")
        self.dim = dim
        self._ids: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None
        self.frozen = False

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)

    def add(self, layout_id: str, vector: np.ndarray) -> None:
        if self.frozen:
            raise FrozenIndexError("cannot add to a frozen index")
        v = np.asarray(vector, dtype=np.float32).ravel()
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"vector for {layout_id!r} has dim {v.size}, index dim {self.dim}")
        if layout_id in set(self._ids):
            raise FrozenIndexError(f"duplicate id {layout_id!r}")
        self._ids.append(layout_id)
        self._vectors.append(v)

    def freeze(self) -> "EmbeddingIndex":
        self._matrix = (
            np.stack(self._vectors) if self._vectors else np.empty((0, self.dim), np.float32)
        )
        self._matrix.setflags(write=False)
        self.frozen = True
        return self

    def vector(self, layout_id: str) -> np.ndarray:
        try:
            return self._matrix[self._ids.index(layout_id)]
        except (ValueError, TypeError):
            raise KeyError(layout_id) from None


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    """sqrt(sum((a - b)^2)); raises DimensionMismatch on unequal lengths."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"dims {a.size} vs {b.size}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def build_index(
    corpus: Corpus, model: ImageAutoencoder, labelnet: LabelNet
) -> EmbeddingIndex:
    """Embed every corpus layout (corpus order) into a frozen index."""
    index = EmbeddingIndex(model.config.embedding_dim)
    for layout in corpus.layouts:
        try:
            index.add(layout.id, embed(model, labelnet, layout))
        except Exception as e:
            raise type(e)(f"embedding layout {layout.id!r}: {e}") from e
    return index.freeze()


def query(
    index: EmbeddingIndex,
    z: np.ndarray,
    k: int,
    exclude: str | None = None,
    query_id: str | None = None,
) -> RankedResult:
    """Exact top-K by Euclidean distance; ties order by ascending id.

    The ``exclude`` id (normally the query itself during evaluation) is
    omitted from the candidates. Returns fewer than K entries only when the
    index is smaller.

    Raises:
        EmptyIndex: the index has no entries (or is not frozen).
        DimensionMismatch: query dimension differs from the index.
        ValueError: k < 1.
    """
    if not index.frozen or len(index) == 0:
        raise EmptyIndex("query requires a non-empty frozen index")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    zq = np.asarray(z, dtype=np.float64).ravel()
    if zq.size != index.dim:
        raise DimensionMismatch(f"query dim {zq.size}, index dim {index.dim}")
    diffs = index._matrix.astype(np.float64) - zq
    dists = np.sqrt(np.einsum("nd,nd->n", diffs, diffs))
    ranked = sorted(
        (float(d), lid) for d, lid in zip(dists, index.ids) if lid != exclude
    )[:k]
    return RankedResult(entries=tuple((lid, d) for d, lid in ranked), query_id=query_id)


def save_index(index: EmbeddingIndex, path: str | Path) -> None:
    """Write a frozen index; byte-identical for identical contents."""
    if not index.frozen:
        raise FrozenIndexError("only frozen indexes can be saved")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<III", FORMAT_VERSION, index.dim, len(index)))
        for lid, row in zip(index.ids, index._matrix):
            raw = lid.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise IndexFormatError(f"id too long: {lid[:32]!r}...")
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(np.ascontiguousarray(row, dtype="<f4").tobytes())


def load_index(path: str | Path) -> EmbeddingIndex:
    """Read a frozen index file.

    Raises:
        IndexFormatError: bad magic/version or truncated data.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    version, dim, n = struct.unpack("<III", raw[4:16])
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"{path}: unsupported format version {version}")
    index = EmbeddingIndex(dim)
    offset = 16
    for _ in range(n):
        if offset + 2 > len(raw):
            raise IndexFormatError(f"{path}: truncated record header")
        (id_len,) = struct.unpack_from("<H", raw, offset)
        offset += 2
        if offset + id_len + dim * 4 > len(raw):
            raise IndexFormatError(f"{path}: truncated record")
        lid = raw[offset:offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(raw, dtype="<f4", count=dim, offset=offset)
        offset += dim * 4
        index.add(lid, vec)
    if offset != len(raw):
        raise IndexFormatError(f"{path}: trailing bytes")
    return index.freeze()
