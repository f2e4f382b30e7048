"""Catalog embedding cache and cosine nearest-neighbor queries.

The index stores one unit-normalized embedding per catalog entry and
answers top-k queries by exhaustive dot-product scan, which is exact and
comfortably fast at catalog scale.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import Alphabet, DEFAULT_ALPHABET
from .model import ModelConfig, ModelParams, embed_batch
from .syngen import validate_catalog


class IndexError_(Exception):
    """Raised for build failures and malformed index files."""


class StaleIndexError(IndexError_):
    """Raised when an index does not match the checkpoint in use."""


class EmptyQueryError(Exception):
    """Raised when a query canonicalizes to the empty string."""


@dataclass(frozen=True)
class Match:
    name: str
    class_index: int
    similarity: float


class EmbeddingIndex:
    """Unit-normalized embeddings for every catalog entry, in catalog order."""

    def __init__(
        self,
        names: Sequence[str],
        matrix: np.ndarray,
        checkpoint_digest: str = "",
        built_at: str = "",
    ):
        if matrix.ndim != 2 or matrix.shape[0] != len(names):
            raise IndexError_("matrix shape does not match the catalog")
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(norms == 0):
            bad = [names[i] for i in np.nonzero(norms == 0)[0][:5]]
            raise IndexError_(f"zero-norm embedding rows for {bad}")
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise IndexError_("embedding rows must be unit-normalized")
        self.names = tuple(names)
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.checkpoint_digest = checkpoint_digest
        self.built_at = built_at

    @property
    def catalog_digest(self) -> str:
        return hashlib.sha256("\n".join(self.names).encode("utf-8")).hexdigest()

    def __len__(self) -> int:
        return len(self.names)


def build_index(
    params: ModelParams,
    config: ModelConfig,
    catalog: Sequence[str],
    checkpoint_digest: str = "",
    built_at: str = "",
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> EmbeddingIndex:
    """Embed and L2-normalize every catalog entry.

    Rejects catalogs with duplicate canonical entries and any entry whose
    embedding is the zero vector.
    """
    names = validate_catalog(catalog, alphabet)
    emb = embed_batch(params, names, config, alphabet)
    norms = np.linalg.norm(emb, axis=1)
    zero = np.nonzero(norms == 0)[0]
    if zero.size:
        raise IndexError_(
            f"zero embedding for catalog entries {[names[i] for i in zero[:5]]}"
        )
    return EmbeddingIndex(
        names=names,
        matrix=emb / norms[:, np.newaxis],
        checkpoint_digest=checkpoint_digest,
        built_at=built_at,
    )


def query(
    index: EmbeddingIndex,
    params: ModelParams,
    config: ModelConfig,
    q: str,
    k: int = 5,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> list[Match]:
    """Top-k catalog entries by cosine similarity to the query embedding.

    Ties break by ascending class index.  A query embedding with zero norm
    (untrainable corner) yields all-zero similarities.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    canonical = alphabet.canonicalize(q)
    if not canonical:
        raise EmptyQueryError(f"query {q!r} canonicalizes to empty")
    emb = embed_batch(params, [canonical], config, alphabet)[0]
    norm = np.linalg.norm(emb)
    if norm > 0:
        emb = emb / norm
    sims = index.matrix @ emb
    k = min(k, len(index))
    order = np.lexsort((np.arange(len(sims)), -sims))[:k]
    return [
        Match(name=index.names[i], class_index=int(i), similarity=float(sims[i]))
        for i in order
    ]


# ---------------------------------------------------------------------------
# Serialization

INDEX_FORMAT = "spellsearch-index"
INDEX_VERSION = 1


def save_index(index: EmbeddingIndex) -> bytes:
    header = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "dims": list(index.matrix.shape),
        "checkpoint_digest": index.checkpoint_digest,
        "catalog_digest": index.catalog_digest,
        "built_at": index.built_at,
        "dtype": "<f8",
    }
    names = "".join(f"{name}\n" for name in index.names)
    return (
        json.dumps(header, sort_keys=True).encode("utf-8")
        + b"\n"
        + names.encode("utf-8")
        + np.ascontiguousarray(index.matrix, dtype="<f8").tobytes()
    )


def load_index(
    data: bytes, expect_checkpoint_digest: Optional[str] = None
) -> EmbeddingIndex:
    """Parse an index file, optionally pinning it to a checkpoint digest."""
    newline = data.find(b"\n")
    if newline < 0:
        raise IndexError_("missing index header")
    try:
        header = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IndexError_(f"bad index header: {exc}") from exc
    if header.get("format") != INDEX_FORMAT:
        raise IndexError_("not an index file")
    if header.get("version") != INDEX_VERSION:
        raise IndexError_(f"unsupported index version {header.get('version')!r}")
    n, d = header["dims"]
    rest = data[newline + 1:]
    names: list[str] = []
    offset = 0
    for _ in range(n):
        end = rest.find(b"\n", offset)
        if end < 0:
            raise IndexError_("truncated name table")
        names.append(rest[offset:end].decode("utf-8"))
        offset = end + 1
    blob = rest[offset:]
    if len(blob) != n * d * 8:
        raise IndexError_(
            f"index payload is {len(blob)} bytes, expected {n * d * 8}"
        )
    matrix = np.frombuffer(blob, dtype="<f8").astype(float).reshape(n, d)
    index = EmbeddingIndex(
        names=names,
        matrix=matrix,
        checkpoint_digest=header.get("checkpoint_digest", ""),
        built_at=header.get("built_at", ""),
    )
    if header.get("catalog_digest") and header["catalog_digest"] != index.catalog_digest:
        raise IndexError_("catalog digest does not match the stored names")
    if (
        expect_checkpoint_digest is not None
        and index.checkpoint_digest != expect_checkpoint_digest
    ):
        raise StaleIndexError(
            "index was built from a different checkpoint "
            f"({index.checkpoint_digest[:12]}… vs {expect_checkpoint_digest[:12]}…)"
        )
    return index


def index_digest(index: EmbeddingIndex) -> str:
    return hashlib.sha256(save_index(index)).hexdigest()
