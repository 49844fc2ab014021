"""TF-IDF features and one-vs-rest linear classifiers for command routing.

The classifier maps a raw user utterance to a `<device>|<service>` label with
a hinge-loss stochastic subgradient pass per epoch. Everything is seeded and
ordered (vocabulary and labels lexicographic, per-epoch shuffles from one
generator), so retraining with the same seed reproduces the weights bit for
bit.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabels, EmptyCorpus, UnreadableFile
from .model import DeviceRegistry
from .text import tokenize

FORMAT_NAME = "edgehome-baseline"
FORMAT_VERSION = 1

RESPONSE_TEMPLATE = "Okay, executing {service} on {name}."


@dataclass
class SparseVector:
    indices: np.ndarray
    values: np.ndarray


class TfidfVectorizer:
    """Bag-of-words with smoothed idf and L2-normalized rows.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, vocabulary sorted lexicographically.
    """

    def __init__(self):
        self.vocabulary: dict[str, int] = {}
        self.idf: np.ndarray = np.zeros(0)

    def fit(self, corpus: list[str]) -> "TfidfVectorizer":
        documents = [set(tokenize(text)) for text in corpus]
        terms = sorted(set().union(*documents)) if documents else []
        if not corpus or not terms:
            raise EmptyCorpus("vectorizer needs at least one document with tokens")
        self.vocabulary = {term: i for i, term in enumerate(terms)}
        df = np.zeros(len(terms), dtype=np.float64)
        for doc in documents:
            for term in doc:
                df[self.vocabulary[term]] += 1
        n = len(corpus)
        self.idf = np.log((1.0 + n) / (1.0 + df)) + 1.0
        return self

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def transform(self, text: str) -> SparseVector:
        counts: dict[int, float] = {}
        for token in tokenize(text):
            index = self.vocabulary.get(token)
            if index is not None:
                counts[index] = counts.get(index, 0.0) + 1.0
        if not counts:
            return SparseVector(np.zeros(0, dtype=np.int64), np.zeros(0))
        indices = np.fromiter(sorted(counts), dtype=np.int64)
        values = np.array([counts[i] for i in indices]) * self.idf[indices]
        norm = math.sqrt(float(values @ values))
        return SparseVector(indices, values / norm)


@dataclass
class LinearOvrModel:
    """Per-label weights and bias over the vectorizer's feature space."""

    labels: list[str]
    weights: np.ndarray  # (labels, features)
    bias: np.ndarray  # (labels,)
    hyperparams: dict = field(default_factory=dict)


def train(
    corpus: list[str],
    labels: list[str],
    vectorizer: TfidfVectorizer,
    *,
    seed: int = 0,
    epochs: int = 10,
    learning_rate: float = 0.1,
    regularization: float = 1e-4,
) -> LinearOvrModel:
    """One-vs-rest hinge-loss SGD with 1/t learning-rate decay.

    Weight shrinkage is carried in a scalar so each step touches only the
    active features.
    """
    if len(corpus) != len(labels):
        raise ValueError("corpus and labels must align")
    unique = sorted(set(labels))
    if len(unique) < 2:
        raise DegenerateLabels(f"need >= 2 distinct labels, got {len(unique)}")
    rows = [vectorizer.transform(text) for text in corpus]
    label_index = {label: k for k, label in enumerate(unique)}
    y = np.array([label_index[label] for label in labels], dtype=np.int64)

    k, v = len(unique), vectorizer.dim
    weights = np.zeros((k, v), dtype=np.float64)
    bias = np.zeros(k, dtype=np.float64)
    scale = 1.0
    rng = np.random.default_rng(seed)
    step = 0
    for _ in range(epochs):
        for i in rng.permutation(len(rows)):
            step += 1
            lr = learning_rate / (1.0 + learning_rate * regularization * step)
            row = rows[i]
            targets = np.full(k, -1.0)
            targets[y[i]] = 1.0
            if row.indices.size:
                scores = scale * (weights[:, row.indices] @ row.values) + bias
            else:
                scores = bias.copy()
            violated = targets * scores < 1.0
            scale *= 1.0 - lr * regularization
            if row.indices.size and violated.any():
                update = (lr / scale) * np.outer(targets[violated], row.values)
                weights[np.ix_(violated, row.indices)] += update
            bias[violated] += lr * targets[violated]
    return LinearOvrModel(
        labels=unique,
        weights=weights * scale,
        bias=bias,
        hyperparams={
            "seed": seed,
            "epochs": epochs,
            "learning_rate": learning_rate,
            "regularization": regularization,
        },
    )


@dataclass(frozen=True)
class BaselinePrediction:
    service: str
    device: str
    response_text: str

    def action_json(self) -> str:
        return json.dumps({"service": self.service, "device": self.device})

    def to_assistant_text(self) -> str:
        """Wire-format reply, parseable by the same path as generated text."""
        return f"{self.response_text}\n```homeassistant\n{self.action_json()}\n```"


def predict(
    utterance: str,
    model: LinearOvrModel,
    vectorizer: TfidfVectorizer,
    registry: DeviceRegistry | None = None,
) -> BaselinePrediction:
    """Classify an utterance into (device, service) and template a reply.

    Ties and empty feature vectors resolve to the lexicographically first
    label, so prediction is total over arbitrary strings.
    """
    row = vectorizer.transform(utterance)
    if row.indices.size == 0:
        winner = 0
    else:
        scores = model.weights[:, row.indices] @ row.values + model.bias
        winner = int(np.argmax(scores))
    device, service = model.labels[winner].split("|", 1)
    name = _friendly_name(device, registry)
    return BaselinePrediction(service, device, RESPONSE_TEMPLATE.format(service=service, name=name))


def _friendly_name(device: str, registry: DeviceRegistry | None) -> str:
    if registry is not None:
        entry = registry.get(device)
        if entry is not None:
            return entry.friendly_name
    tail = device.split(".", 1)[-1]
    return tail.replace("_", " ")


def save_model(path: str, model: LinearOvrModel, vectorizer: TfidfVectorizer) -> None:
    """Single self-describing JSON artifact holding vectorizer and weights."""
    terms = sorted(vectorizer.vocabulary, key=vectorizer.vocabulary.get)
    obj = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "tokenizer": "lowercase-alnum-runs",
        "vocabulary": terms,
        "idf": vectorizer.idf.tolist(),
        "labels": model.labels,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "hyperparams": model.hyperparams,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)


def load_model(path: str) -> tuple[LinearOvrModel, TfidfVectorizer]:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UnreadableFile(f"{path}: {exc}") from None
    if obj.get("format") != FORMAT_NAME or obj.get("version") != FORMAT_VERSION:
        raise UnreadableFile(f"{path}: not a {FORMAT_NAME} v{FORMAT_VERSION} file")
    vectorizer = TfidfVectorizer()
    vectorizer.vocabulary = {term: i for i, term in enumerate(obj["vocabulary"])}
    vectorizer.idf = np.asarray(obj["idf"], dtype=np.float64)
    model = LinearOvrModel(
        labels=list(obj["labels"]),
        weights=np.asarray(obj["weights"], dtype=np.float64),
        bias=np.asarray(obj["bias"], dtype=np.float64),
        hyperparams=dict(obj.get("hyperparams", {})),
    )
    return model, vectorizer
