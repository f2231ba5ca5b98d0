"""Word-embedding tables: loading, normalization, orthogonal alignment, lookup.

Tables map words to fixed-dimension float64 vectors. Alignment between two
tables is solved as an orthogonal Procrustes problem over a seed dictionary,
mapping the target-language table into the source-language space.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .conll import Corpus
from .errors import AlignmentError, ParseError, ValidationError

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-8


@dataclass(eq=False)
class EmbeddingTable:
    """Word -> vector store. Vectors share one dimensionality; insertion order
    of words is preserved and meaningful for serialization.

    Equality is identity: generated field comparison would run elementwise
    ``==`` on the arrays, and content comparisons should go through
    ``content_hash`` anyway."""

    vectors: dict[str, np.ndarray]
    dim: int

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[word]

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def words(self) -> list[str]:
        return list(self.vectors)

    def matrix(self) -> np.ndarray:
        return np.stack(list(self.vectors.values())) if self.vectors else np.zeros((0, self.dim))

    def content_hash(self) -> str:
        """sha256 over the sorted (word, vector bytes) entries; used to tie a
        trained model to the exact embedding table it was trained with."""
        h = hashlib.sha256()
        for word in sorted(self.vectors):
            h.update(word.encode("utf-8"))
            h.update(b"\x00")
            h.update(np.ascontiguousarray(self.vectors[word], dtype=np.float64).tobytes())
        return h.hexdigest()


def _looks_like_header(fields: list[str]) -> bool:
    if len(fields) != 2:
        return False
    try:
        int(fields[0]), int(fields[1])
    except ValueError:
        return False
    return True


def load_embeddings(text: str | TextIO | Iterable[str]) -> EmbeddingTable:
    """Parse the text vector format: optional ``count dim`` header, then one
    ``word v1 .. v_dim`` row per line. First occurrence wins on duplicates."""
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text

    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    duplicates = 0
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split()
        if line_number == 1 and _looks_like_header(fields):
            dim = int(fields[1])
            continue
        word, values = fields[0], fields[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise ParseError("row has no vector values", line_number=line_number)
        if len(values) != dim:
            raise ParseError(
                f"expected {dim} vector values, found {len(values)}",
                line_number=line_number,
            )
        try:
            vector = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"unparseable value: {exc}", line_number=line_number) from exc
        if word in vectors:
            duplicates += 1
            continue
        vectors[word] = vector
    if duplicates:
        logger.warning("ignored %d duplicate embedding rows", duplicates)
    if dim is None:
        raise ParseError("embedding stream is empty", line_number=1)
    return EmbeddingTable(vectors, dim)


def save_embeddings(table: EmbeddingTable, stream: TextIO) -> None:
    """Write the ``count dim`` header plus one row per word. Values are
    serialized with ``repr`` so that a reload is bit-exact."""
    stream.write(f"{len(table)} {table.dim}\n")
    for word, vector in table.vectors.items():
        stream.write(word + " " + " ".join(repr(float(x)) for x in vector) + "\n")


def normalize_table(table: EmbeddingTable) -> EmbeddingTable:
    """Unit-norm each vector, subtract the table mean, unit-norm again.

    Vectors that are zero at either normalization step are dropped with a
    logged count. Raises ``ValidationError`` if nothing survives (e.g. a
    single-entry table, whose centered vector is zero).
    """
    dropped = 0
    unit: dict[str, np.ndarray] = {}
    for word, vector in table.vectors.items():
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            dropped += 1
            continue
        unit[word] = vector / norm
    if not unit:
        raise ValidationError("no nonzero vectors to normalize")
    mean = np.mean(np.stack(list(unit.values())), axis=0)
    result: dict[str, np.ndarray] = {}
    for word, vector in unit.items():
        centered = vector - mean
        norm = np.linalg.norm(centered)
        if norm == 0.0:
            dropped += 1
            continue
        result[word] = centered / norm
    if dropped:
        logger.warning("dropped %d vectors that vanished during normalization", dropped)
    if not result:
        raise ValidationError(
            "all vectors vanished after mean-centering (table too small?)"
        )
    return EmbeddingTable(result, table.dim)


@dataclass
class OrthogonalMap:
    """A dim x dim orthogonal matrix; validated on construction."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValidationError(f"map matrix must be square, got {self.matrix.shape}")
        deviation = self.orthogonality_deviation()
        if deviation > ORTHOGONALITY_TOL:
            raise ValidationError(
                f"matrix is not orthogonal: max |W'W - I| = {deviation:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def orthogonality_deviation(self) -> float:
        gram = self.matrix.T @ self.matrix
        return float(np.max(np.abs(gram - np.eye(self.matrix.shape[0]))))


def load_word_pairs(text: str | TextIO | Iterable[str]) -> list[tuple[str, str]]:
    """Read one ``source target`` pair per line (tab or space separated)."""
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text
    pairs: list[tuple[str, str]] = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(None, 1)
        if len(fields) != 2 or not fields[1].strip():
            raise ParseError(
                f"expected 'source target', found {line!r}", line_number=line_number
            )
        target = fields[1].strip()
        if len(target.split()) != 1:
            raise ParseError(
                f"expected exactly two columns, found {line!r}", line_number=line_number
            )
        pairs.append((fields[0], target))
    return pairs


def procrustes_align(
    source: EmbeddingTable,
    target: EmbeddingTable,
    seed_pairs: Sequence[tuple[str, str]],
    min_pairs: int | None = None,
) -> OrthogonalMap:
    """Solve for the orthogonal W minimizing sum ||W t_i - s_i||^2 over seed
    dictionary pairs, so that W maps target-language vectors into the
    source-language space.

    Pairs whose words are missing from either table are dropped. Fewer than
    ``min_pairs`` usable pairs (default: the embedding dimension) raises
    :class:`AlignmentError`.
    """
    if source.dim != target.dim:
        raise ValidationError(f"dim mismatch: source {source.dim} vs target {target.dim}")
    if min_pairs is None:
        min_pairs = source.dim
    usable = [(s, t) for s, t in seed_pairs if s in source and t in target]
    if len(usable) < min_pairs:
        raise AlignmentError(
            f"insufficient supervision: {len(usable)} usable pairs "
            f"of {len(seed_pairs)}, need at least {min_pairs}"
        )
    source_matrix = np.stack([source[s] for s, _ in usable])
    target_matrix = np.stack([target[t] for _, t in usable])
    cross = source_matrix.T @ target_matrix
    try:
        u, _, vt = np.linalg.svd(cross)
    except np.linalg.LinAlgError as exc:
        raise AlignmentError(f"SVD failed: {exc}") from exc
    return OrthogonalMap(u @ vt)


def apply_alignment(table: EmbeddingTable, omap: OrthogonalMap) -> EmbeddingTable:
    """Map every vector through the orthogonal matrix; keys unchanged."""
    if table.dim != omap.dim:
        raise ValidationError(f"dim mismatch: table {table.dim} vs map {omap.dim}")
    vectors = {word: omap.matrix @ vector for word, vector in table.vectors.items()}
    return EmbeddingTable(vectors, table.dim)


def merge_tables(a: EmbeddingTable, b: EmbeddingTable) -> tuple[EmbeddingTable, int]:
    """Union of two tables; on a key collision the entry from ``a`` wins.
    Returns the merged table and the collision count."""
    if a.dim != b.dim:
        raise ValidationError(f"dim mismatch: {a.dim} vs {b.dim}")
    merged = dict(a.vectors)
    collisions = 0
    for word, vector in b.vectors.items():
        if word in merged:
            collisions += 1
        else:
            merged[word] = vector
    return EmbeddingTable(merged, a.dim), collisions


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValidationError(f"dim mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


class OovVectors:
    """Per-run cache of random vectors for out-of-vocabulary words.

    Each distinct word gets one vector with components drawn uniformly from
    [-0.1, 0.1]. The vector is derived from (seed, word) rather than from
    lookup order, so repeated lookups are bitwise identical regardless of
    interleaving.
    """

    def __init__(self, dim: int, seed: int):
        if seed < 0:
            raise ValidationError("seed must be non-negative")
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def vector_for(self, word: str) -> np.ndarray:
        vector = self._cache.get(word)
        if vector is None:
            digest = int.from_bytes(hashlib.sha256(word.encode("utf-8")).digest(), "big")
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, digest]))
            vector = rng.uniform(-0.1, 0.1, self.dim)
            self._cache[word] = vector
        return vector


def lookup(table: EmbeddingTable, word: str, oov: OovVectors) -> np.ndarray:
    """Stored vector for in-vocabulary words, cached random vector otherwise."""
    vector = table.vectors.get(word)
    if vector is not None:
        return vector
    return oov.vector_for(word)


@dataclass
class OovReport:
    """Out-of-vocabulary rates in percent: types count distinct surfaces,
    tokens count occurrences."""

    type_rate: float
    token_rate: float
    n_types: int = 0
    n_tokens: int = 0
    oov_types: int = 0
    oov_tokens: int = 0

    def as_text(self) -> str:
        return f"type {self.type_rate:.4f}\ntoken {self.token_rate:.4f}\n"

    def as_record(self) -> dict:
        return {
            "type_rate": self.type_rate,
            "token_rate": self.token_rate,
            "n_types": self.n_types,
            "n_tokens": self.n_tokens,
            "oov_types": self.oov_types,
            "oov_tokens": self.oov_tokens,
        }


def oov_rate(corpus: Corpus, table: EmbeddingTable) -> OovReport:
    """Percentage of corpus surfaces (distinct and by occurrence) missing
    from the table. The corpus should already be normalized so the surfaces
    match what the tagger would look up."""
    n_tokens = 0
    counts: dict[str, int] = {}
    for sentence in corpus.sentences:
        for token in sentence.tokens:
            counts[token.surface] = counts.get(token.surface, 0) + 1
            n_tokens += 1
    if n_tokens == 0:
        raise ValidationError("cannot compute OOV rate of an empty corpus")
    oov_types = sum(1 for word in counts if word not in table)
    oov_tokens = sum(count for word, count in counts.items() if word not in table)
    return OovReport(
        type_rate=100.0 * oov_types / len(counts),
        token_rate=100.0 * oov_tokens / n_tokens,
        n_types=len(counts),
        n_tokens=n_tokens,
        oov_types=oov_types,
        oov_tokens=oov_tokens,
    )
