"""Token-level semantic similarity via greedy embedding matching.

Precision is the mean, over candidate tokens, of the best cosine against any
reference token; recall is the mirror image; the score is their F1. Tokens
missing from the embedding table get a deterministic pseudo-random unit
vector derived from the token's bytes, so scoring never depends on table
coverage or process state.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyText, UnreadableFile
from .text import tokenize

DEFAULT_DIM = 32


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm < 1e-12:
        basis = np.zeros(vector.shape, dtype=np.float64)
        basis[0] = 1.0
        return basis
    return vector / norm


class EmbeddingTable:
    """token -> unit vector, with deterministic pseudo-random OOV vectors."""

    def __init__(self, vectors: dict[str, list[float]] | None = None, dim: int = DEFAULT_DIM):
        self._vectors: dict[str, np.ndarray] = {}
        self.dim = dim
        for token, values in (vectors or {}).items():
            arr = np.asarray(values, dtype=np.float64)
            self.dim = arr.shape[0]
            self._vectors[token] = _unit(arr)
        self._oov_cache: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def vector(self, token: str) -> np.ndarray:
        known = self._vectors.get(token)
        if known is not None:
            return known
        cached = self._oov_cache.get(token)
        if cached is None:
            seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")
            rng = np.random.default_rng(seed)
            cached = _unit(rng.standard_normal(self.dim))
            self._oov_cache[token] = cached
        return cached

    def matrix(self, tokens: list[str]) -> np.ndarray:
        return np.stack([self.vector(t) for t in tokens])

    @staticmethod
    def from_json_file(path: str) -> "EmbeddingTable":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UnreadableFile(f"{path}: {exc}") from None
        return EmbeddingTable(obj.get("vectors", {}), dim=obj.get("dim", DEFAULT_DIM))

    def to_json_file(self, path: str) -> None:
        obj = {
            "dim": self.dim,
            "vectors": {t: [float(x) for x in v] for t, v in self._vectors.items()},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)


@dataclass(frozen=True)
class SimilarityScore:
    precision: float
    recall: float
    f1: float


def score_semantic_similarity(
    candidate: str, reference: str, table: EmbeddingTable | None = None
) -> SimilarityScore:
    """Greedy-match F1 between candidate and reference text.

    Raises EmptyText when either side has no tokens. All three numbers stay
    inside [-1, 1]; when either side matches only negatively (precision or
    recall <= 0) the harmonic mean is meaningless and the score falls back
    to min(precision, recall).
    """
    table = table if table is not None else EmbeddingTable()
    candidate_tokens = tokenize(candidate)
    reference_tokens = tokenize(reference)
    if not candidate_tokens or not reference_tokens:
        raise EmptyText("both candidate and reference need at least one token")
    sims = table.matrix(candidate_tokens) @ table.matrix(reference_tokens).T
    precision = float(np.mean(np.max(sims, axis=1)))
    recall = float(np.mean(np.max(sims, axis=0)))
    if precision > 0 and recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = min(precision, recall)
    return SimilarityScore(precision, recall, f1)


def summarize_scores(values: list[float]) -> dict[str, float]:
    """mean/median/std block for a metrics report; empty input yields zeros."""
    if not values:
        return {"mean": 0.0, "median": 0.0, "std": 0.0, "count": 0}
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(np.mean(arr)),
        "median": float(np.median(arr)),
        "std": float(np.std(arr)),
        "count": int(arr.size),
    }
