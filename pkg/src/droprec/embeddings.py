"""Word-embedding tables and context-embedding construction around gaps.

Tables load from the word2vec text format (header ``"vocab_size dim"``,
then one ``"word v1 ... vD"`` line per word).  Out-of-vocabulary lookups
return the zero vector, and positions beyond sentence boundaries contribute
zero padding, so a context embedding always has length 2 * window * dim.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import AnnotatedSentence
from .rng import SplitMix64, fnv1a64

log = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    """Malformed embedding file or incompatible dimensions."""


@dataclass(frozen=True)
class ContextVector:
    """Concatenated window embeddings around one gap; length 2 * window * dim."""

    values: np.ndarray
    window: int
    gap_index: int


class EmbeddingTable:
    """Immutable word -> float64 vector map with a zero unknown-word vector.

    `source` describes how the table was built (word2vec file or fallback
    generator) so a serialized model can name the table it was trained with.
    """

    def __init__(
        self,
        dim: int,
        vectors: dict[str, np.ndarray],
        source: dict | None = None,
        duplicates_skipped: int = 0,
    ):
        if dim < 1:
            raise EmbeddingError(f"embedding dim must be >= 1, got {dim}")
        for word, vec in vectors.items():
            if vec.shape != (dim,):
                raise EmbeddingError(
                    f"vector for {word!r} has length {vec.shape[0]}, expected {dim}"
                )
        self.dim = dim
        self._vectors = vectors
        self.unk_vector = np.zeros(dim)
        self.source = source or {"kind": "inline", "dim": dim}
        self.duplicates_skipped = duplicates_skipped

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def lookup(self, word: str) -> np.ndarray:
        """Vector for `word`, or the zero unk vector when absent."""
        return self._vectors.get(word, self.unk_vector)

    def words(self) -> list[str]:
        return list(self._vectors)


def load_embeddings(path: str | Path, expected_dim: int | None = None) -> EmbeddingTable:
    """Load a word2vec text file; duplicates keep the first occurrence."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}: header must be 'vocab_size dim'")
        try:
            vocab_size, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingError(f"{path}: non-integer header fields {header!r}") from None
        if dim < 1:
            raise EmbeddingError(f"{path}: dimension must be positive, got {dim}")
        if expected_dim is not None and dim != expected_dim:
            raise EmbeddingError(
                f"{path}: file dimension {dim} conflicts with expected {expected_dim}"
            )
        vectors: dict[str, np.ndarray] = {}
        duplicates = 0
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            word, comps = parts[0], [p for p in parts[1:] if p]
            if len(comps) != dim:
                raise EmbeddingError(
                    f"{path} line {line_no}: expected {dim} components, got {len(comps)}"
                )
            try:
                vec = np.array([float(c) for c in comps])
            except ValueError:
                raise EmbeddingError(
                    f"{path} line {line_no}: non-numeric vector component"
                ) from None
            if word in vectors:
                duplicates += 1
                continue
            vectors[word] = vec
    if duplicates:
        log.warning("%s: skipped %d duplicate word(s), kept first occurrence", path, duplicates)
    if len(vectors) != vocab_size:
        log.warning(
            "%s: header declares %d words, file has %d distinct", path, vocab_size, len(vectors)
        )
    return EmbeddingTable(
        dim,
        vectors,
        source={"kind": "word2vec", "path": str(path), "dim": dim},
        duplicates_skipped=duplicates,
    )


def fallback_vector(word: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic pseudo-embedding: pure function of (word bytes, seed).

    The word's UTF-8 bytes are hashed with FNV-1a 64 and XORed with the
    seed to key a SplitMix64 stream; components are uniform in
    [-0.5/dim, 0.5/dim].
    """
    stream = SplitMix64(fnv1a64(word.encode("utf-8")) ^ (seed & ((1 << 64) - 1)))
    return (stream.floats(dim) - 0.5) / dim


def deterministic_fallback_table(vocab: list[str], dim: int, seed: int) -> EmbeddingTable:
    """Seeded random table over `vocab`; stands in for pretrained vectors."""
    if dim < 1:
        raise EmbeddingError(f"embedding dim must be >= 1, got {dim}")
    vectors = {word: fallback_vector(word, dim, seed) for word in vocab}
    return EmbeddingTable(
        dim,
        vectors,
        source={"kind": "fallback", "dim": dim, "seed": seed, "vocab": list(vocab)},
    )


def table_from_source(source: dict) -> EmbeddingTable:
    """Rebuild a table from its `source` descriptor (used by model loading)."""
    kind = source.get("kind")
    if kind == "word2vec":
        return load_embeddings(source["path"], expected_dim=source.get("dim"))
    if kind == "fallback":
        return deterministic_fallback_table(source["vocab"], source["dim"], source["seed"])
    raise EmbeddingError(f"cannot rebuild embedding table from source kind {kind!r}")


def context_embedding(
    sentence: AnnotatedSentence,
    gap_index: int,
    window: int,
    table: EmbeddingTable,
) -> ContextVector:
    """Concatenate the window of embeddings around a gap.

    Layout: the `window` tokens left of the gap in sentence order (nearest
    token last), then the `window` tokens right of it (nearest first).
    Positions past either boundary contribute zero vectors, so the result
    always has length 2 * window * dim.
    """
    n = len(sentence.tokens)
    if not 0 <= gap_index <= n:
        raise ValueError(f"gap index {gap_index} out of range [0, {n}]")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    parts = []
    for i in range(gap_index - window, gap_index + window):
        if 0 <= i < n:
            parts.append(table.lookup(sentence.tokens[i]))
        else:
            parts.append(table.unk_vector)
    return ContextVector(np.concatenate(parts), window, gap_index)
