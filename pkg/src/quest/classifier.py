"""Linear one-vs-one SVMs, a chi-square 1-NN oracle and the cross-validation harness.

Binary machines are trained by dual coordinate descent on the L2-regularised
hinge loss. The bias is learned as the weight of a constant feature equal to
1, so it is regularised together with the weights. Sample order in each epoch
comes from the seeded SplitMix64 generator, which makes training bit-for-bit
reproducible.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .dataset import FoldPlan, SplitMix64
from .errors import ConfigError, DegenerateTrainingError, ShapeError
from .features import FeatureTable

CHI2_EPS = 1e-10


@dataclass(frozen=True)
class BinarySvm:
    weights: np.ndarray
    bias: float
    class_pair: tuple = (1, -1)
    dual_objective: tuple = field(default=(), compare=False, repr=False)

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.weights.shape[0]:
            raise ShapeError(f"feature dimension {X.shape[-1]} != model dimension {self.weights.shape[0]}")
        return X @ self.weights + self.bias

    def predict(self, X) -> list:
        pos, neg = self.class_pair
        return [pos if d >= 0 else neg for d in np.atleast_1d(self.decision_function(X))]


def train_binary_svm(X, y, c: float = 1.0, epochs: int = 50, seed: int = 0,
                     class_pair: tuple = (1, -1)) -> BinarySvm:
    """Fit a linear SVM on labels in {+1, -1}.

    Works in the dual with a precomputed Gram matrix; ``dual_objective`` on the
    result records the dual objective after every epoch.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError(f"inconsistent shapes X{X.shape}, y{y.shape}")
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DegenerateTrainingError("binary training needs both +1 and -1 samples")
    if c <= 0:
        raise ConfigError(f"c must be positive, got {c}")
    n = X.shape[0]
    Xa = np.hstack([X, np.ones((n, 1))])
    K = Xa @ Xa.T
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    s = np.zeros(n)  # s = K @ (alpha * y)
    rng = SplitMix64(seed)
    history = []
    for _ in range(epochs):
        for i in rng.permutation(n):
            g = y[i] * s[i] - 1.0
            a = alpha[i]
            if (a == 0.0 and g >= 0.0) or (a == c and g <= 0.0):
                continue
            new = min(max(a - g / diag[i], 0.0), c)
            delta = new - a
            if delta != 0.0:
                alpha[i] = new
                s += (delta * y[i]) * K[:, i]
        ay = alpha * y
        history.append(0.5 * float(ay @ s) - float(alpha.sum()))
    wa = Xa.T @ (alpha * y)
    return BinarySvm(wa[:-1].copy(), float(wa[-1]), tuple(class_pair), tuple(history))


@dataclass(frozen=True)
class MultiClassModel:
    labels: tuple
    machines: tuple
    kernel: str = "linear"
    config: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.machines[0].weights.shape[0]

    def decision_matrix(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ShapeError(f"feature dimension {X.shape[1]} != model dimension {self.dim}")
        W = np.stack([m.weights for m in self.machines])
        b = np.array([m.bias for m in self.machines])
        return X @ W.T + b

    def predict(self, X) -> list:
        D = self.decision_matrix(X)
        return [_vote(self.labels, self.machines, row) for row in D]


def _vote(labels, machines, decisions):
    """Majority vote; ties go to the largest sum of winning |margins|, then the lowest label index."""
    index = {lab: i for i, lab in enumerate(labels)}
    votes = [0] * len(labels)
    margins = [[] for _ in labels]
    for m, d in zip(machines, decisions):
        winner = m.class_pair[0] if d >= 0 else m.class_pair[1]
        votes[index[winner]] += 1
        margins[index[winner]].append(abs(float(d)))
    best = max(votes)
    tied = [i for i, v in enumerate(votes) if v == best]
    if len(tied) > 1:
        sums = {i: math.fsum(margins[i]) for i in tied}
        top = max(sums.values())
        tied = [i for i in tied if sums[i] == top]
    return labels[tied[0]]


def predict_ovo(model: MultiClassModel, t):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise ShapeError("predict_ovo takes a single feature vector")
    return model.predict(t[None, :])[0]


def train_ovo(X, y, c: float = 1.0, epochs: int = 50, seed: int = 0,
              labels=None) -> MultiClassModel:
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise ShapeError(f"inconsistent shapes X{X.shape}, {len(y)} labels")
    labels = tuple(sorted(set(y)) if labels is None else labels)
    present = [lab for lab in labels if lab in set(y)]
    if len(present) < 2:
        raise DegenerateTrainingError("need at least two classes to train")
    y_arr = np.array(y, dtype=object)
    machines = []
    for k, (pos, neg) in enumerate(combinations(present, 2)):
        mask = (y_arr == pos) | (y_arr == neg)
        target = np.where(y_arr[mask] == pos, 1.0, -1.0)
        machines.append(train_binary_svm(X[mask], target, c=c, epochs=epochs,
                                         seed=seed + k, class_pair=(pos, neg)))
    return MultiClassModel(tuple(present), tuple(machines),
                           config={"c": c, "epochs": epochs, "seed": seed})


def model_to_dict(model: MultiClassModel) -> dict:
    return {
        "kernel": model.kernel,
        "labels": list(model.labels),
        "trainer": {"algorithm": "dual-coordinate-descent", **model.config},
        "machines": [
            {"pair": list(m.class_pair), "bias": m.bias, "weights": m.weights.tolist()}
            for m in model.machines
        ],
    }


def model_from_dict(d: dict) -> MultiClassModel:
    if d.get("kernel", "linear") != "linear":
        raise ConfigError(f"unsupported kernel {d['kernel']!r}")
    machines = tuple(
        BinarySvm(np.array(m["weights"], dtype=np.float64), float(m["bias"]), tuple(m["pair"]))
        for m in d["machines"])
    return MultiClassModel(tuple(d["labels"]), machines, config=dict(d.get("trainer", {})))


class KnnOracle:
    """1-nearest-neighbour under the chi-square histogram distance."""

    def __init__(self, X, y):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = list(y)
        if self.X.shape[0] == 0:
            raise ValueError("k-NN needs at least one training sample")

    def distances(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if t.shape != (self.X.shape[1],):
            raise ShapeError(f"feature dimension {t.shape} != {self.X.shape[1]}")
        diff = self.X - t
        return (diff * diff / (self.X + t + CHI2_EPS)).sum(axis=1)

    def predict(self, X) -> list:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return [self.y[int(np.argmin(self.distances(t)))] for t in X]


def knn_predict(train_X, train_y, t, k: int = 1):
    if k != 1:
        raise ValueError("only k=1 is supported")
    if len(train_y) == 0:
        raise ValueError("k-NN needs at least one training sample")
    return KnnOracle(train_X, train_y).predict(np.asarray(t)[None, :])[0]


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple
    counts: np.ndarray

    @classmethod
    def from_predictions(cls, labels, y_true, y_pred) -> "ConfusionMatrix":
        labels = tuple(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for t, p in zip(y_true, y_pred):
            counts[index[t], index[p]] += 1
        return cls(labels, counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.labels != other.labels:
            raise ValueError("label sets differ")
        return ConfusionMatrix(self.labels, self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def accuracy(self) -> float:
        return 100.0 * self.correct / self.total

    def row_normalized(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts, rows, out=np.zeros(self.counts.shape), where=rows > 0)

    def to_csv(self) -> str:
        lines = [",".join(["true\\pred"] + [str(lab) for lab in self.labels])]
        for lab, row in zip(self.labels, self.counts):
            lines.append(",".join([str(lab)] + [str(int(v)) for v in row]))
        return "\n".join(lines) + "\n"

    def to_table(self, method: str = "QUEST") -> str:
        """Row-normalised, tab-separated table with 2-decimal cells and a caption."""
        norm = self.row_normalized()
        lines = ["\t" + "\t".join(str(lab) for lab in self.labels)]
        for lab, row in zip(self.labels, norm):
            lines.append(str(lab) + "\t" + "\t".join(f"{v:.2f}" for v in row))
        lines.append("")
        lines.append(f"Confusion matrix of {method} for {len(self.labels)}-class expression classification")
        return "\n".join(lines) + "\n"


def evaluate(classifier, X, y, labels=None):
    """Return ``(accuracy percent, ConfusionMatrix)`` of ``classifier.predict`` on ``X``."""
    y = list(y)
    if not y:
        raise ValueError("evaluation needs at least one test sample")
    pred = classifier.predict(X)
    if labels is None:
        labels = sorted(set(y) | set(pred))
    cm = ConfusionMatrix.from_predictions(labels, y, pred)
    return cm.accuracy(), cm


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "svm"
    c: float = 1.0
    epochs: int = 50
    seed: int = 42

    def __post_init__(self):
        if self.kind not in ("svm", "knn"):
            raise ConfigError(f"unknown classifier {self.kind!r}")

    def fit(self, X, y, labels=None):
        if self.kind == "knn":
            return KnnOracle(X, y)
        return train_ovo(X, y, c=self.c, epochs=self.epochs, seed=self.seed,
                         labels=labels)


@dataclass
class CvReport:
    classifier: str
    protocol: str
    seed: int
    fold_accuracies: list
    confusion: ConfusionMatrix
    warnings: list
    predictions: list  # per fold: list of (record index, predicted label)
    fold_confusions: list = field(default_factory=list)

    @property
    def mean_accuracy(self) -> float:
        return sum(self.fold_accuracies) / len(self.fold_accuracies)

    def to_dict(self, run_config: dict | None = None) -> dict:
        d = {
            "classifier": self.classifier,
            "protocol": self.protocol,
            "seed": self.seed,
            "n_folds": len(self.fold_accuracies),
            "fold_accuracies": [round(a, 2) for a in self.fold_accuracies],
            "mean_accuracy": round(self.mean_accuracy, 2),
            "labels": list(self.confusion.labels),
            "confusion": self.confusion.counts.tolist(),
            "warnings": list(self.warnings),
        }
        if self.protocol == "random-holdout":
            d["note"] = ("random-holdout splits at record level; a subject may contribute "
                         "images to both train and test")
        if run_config is not None:
            d["run_config"] = run_config
        return d


def _run_fold(i, train, test, table: FeatureTable, config: ClassifierConfig, labels):
    y_train = [table.labels[j] for j in train]
    y_test = [table.labels[j] for j in test]
    warnings = [f"fold {i}: test class {lab!r} absent from training"
                for lab in sorted(set(y_test) - set(y_train))]
    model = config.fit(table.X[list(train)], y_train)
    preds = model.predict(table.X[list(test)])
    cm = ConfusionMatrix.from_predictions(labels, y_test, preds)
    return cm.accuracy(), cm, warnings, list(zip(test, preds))


def run_cross_validation(plan: FoldPlan, table: FeatureTable,
                         config: ClassifierConfig | None = None, threads: int = 1) -> CvReport:
    config = config or ClassifierConfig()
    n = len(table)
    for train, test in plan.folds:
        if any(not 0 <= j < n for j in (*train, *test)):
            raise ConfigError("fold plan references records outside the feature table")
        if not test:
            raise ConfigError("fold plan has an empty test split")
    labels = tuple(sorted(set(table.labels)))
    if len(labels) < 2:
        raise ConfigError("cross-validation needs at least two classes")
    jobs = [(i, tr, te) for i, (tr, te) in enumerate(plan.folds)]
    run = lambda job: _run_fold(*job, table, config, labels)  # noqa: E731
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    pooled = ConfusionMatrix(labels, np.zeros((len(labels),) * 2, dtype=np.int64))
    for _, cm, _, _ in results:
        pooled = pooled + cm
    return CvReport(
        classifier=config.kind,
        protocol=plan.protocol,
        seed=plan.seed,
        fold_accuracies=[r[0] for r in results],
        confusion=pooled,
        warnings=[w for r in results for w in r[2]],
        predictions=[r[3] for r in results],
        fold_confusions=[r[1] for r in results],
    )


def write_report(report: CvReport, directory, run_config: dict | None = None,
                 method: str = "QUEST") -> dict:
    """Write report.json, confusion.csv and confusion.txt; return the paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "csv": out / "confusion.csv",
        "table": out / "confusion.txt",
    }
    paths["json"].write_text(json.dumps(report.to_dict(run_config), indent=1) + "\n", encoding="utf-8")
    paths["csv"].write_text(report.confusion.to_csv(), encoding="utf-8")
    paths["table"].write_text(report.confusion.to_table(method), encoding="utf-8")
    return paths
