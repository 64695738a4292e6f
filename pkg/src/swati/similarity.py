"""Skill-set and content similarity.

Skill similarity is Jaccard overlap between canonical skill sets. Content
similarity is the cosine between L2-normalized TF-IDF vectors; since term
weights are non-negative it always lands in [0, 1]. The vectorizer is fitted
jointly over volunteers and tasks so both live in a single term space, with

    idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1

as the only supported idf variant (the +1 offsets keep every weight finite
and positive).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

import numpy as np

from .corpus import Corpus
from .errors import EmptyCorpusError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("swati.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


_STOPWORDS = _load_stopwords()


@dataclass(frozen=True)
class VectorizerSettings:
    min_token_len: int = 2
    use_stopwords: bool = True


def tokenize(text: str, settings: VectorizerSettings = VectorizerSettings()) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop short and stop tokens."""
    tokens = _TOKEN_RE.findall(text.lower())
    out = [t for t in tokens if len(t) >= settings.min_token_len]
    if settings.use_stopwords:
        out = [t for t in out if t not in _STOPWORDS]
    return out


@dataclass(eq=False)
class SparseVector:
    """Unit-norm sparse vector as parallel (index, weight) arrays."""

    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.indices.shape != self.weights.shape:
            raise ValueError("indices and weights must align")
        if len(self.indices) > 1 and not np.all(np.diff(self.indices) > 0):
            raise ValueError("indices must be strictly increasing")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")
        if len(self.weights) and abs(np.linalg.norm(self.weights) - 1.0) > 1e-9:
            raise ValueError("non-empty vectors must have unit L2 norm")

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    def is_empty(self) -> bool:
        return len(self.indices) == 0

    def dot(self, other: "SparseVector") -> float:
        _, ia, ib = np.intersect1d(
            self.indices, other.indices, assume_unique=True, return_indices=True
        )
        return float(np.dot(self.weights[ia], other.weights[ib]))

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size)
        dense[self.indices] = self.weights
        return dense


@dataclass
class VectorizerModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_count: int
    settings: VectorizerSettings = field(default_factory=VectorizerSettings)

    def __post_init__(self):
        self.idf = np.asarray(self.idf, dtype=np.float64)
        if len(self.idf) != len(self.vocabulary):
            raise ValueError("idf length must match vocabulary size")
        if np.any(self.idf <= 0):
            raise ValueError("idf weights must be positive")

    @property
    def size(self) -> int:
        return len(self.vocabulary)


def fit_vectorizer(
    corpus: Corpus, settings: VectorizerSettings = VectorizerSettings()
) -> VectorizerModel:
    docs = corpus.documents()
    if not docs:
        raise EmptyCorpusError("cannot fit a vectorizer on an empty corpus")
    df: dict[str, int] = {}
    for doc in docs:
        for term in set(tokenize(doc.text, settings)):
            df[term] = df.get(term, 0) + 1
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    n_docs = len(docs)
    idf = np.array(
        [np.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in sorted(df)], dtype=np.float64
    )
    return VectorizerModel(vocabulary=vocabulary, idf=idf, doc_count=n_docs, settings=settings)


def vectorize(model: VectorizerModel, text: str) -> SparseVector:
    """Raw term counts times idf, L2-normalized; out-of-vocabulary terms dropped."""
    counts: dict[int, int] = {}
    for term in tokenize(text, model.settings):
        idx = model.vocabulary.get(term)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector.empty()
    indices = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[i] for i in indices], dtype=np.float64) * model.idf[indices]
    weights /= np.linalg.norm(weights)
    return SparseVector(indices, weights)


def skill_sim(a: Iterable[str], b: Iterable[str]) -> float:
    """Jaccard overlap; two empty sets score 0 rather than 1."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


def content_sim(a: SparseVector, b: SparseVector) -> float:
    if a.is_empty() or b.is_empty():
        return 0.0
    return min(1.0, max(0.0, a.dot(b)))


def save_vectorizer(model: VectorizerModel, path: str) -> None:
    payload = {
        "vocabulary": model.vocabulary,
        "idf": model.idf.tolist(),
        "doc_count": model.doc_count,
        "settings": {
            "min_token_len": model.settings.min_token_len,
            "use_stopwords": model.settings.use_stopwords,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_vectorizer(path: str) -> VectorizerModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return VectorizerModel(
        vocabulary=payload["vocabulary"],
        idf=np.array(payload["idf"]),
        doc_count=payload["doc_count"],
        settings=VectorizerSettings(**payload["settings"]),
    )
