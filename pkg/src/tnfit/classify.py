"""Closed-set classification with a "none of the above" outcome.

TQDA fits a truncated normal per class, so an observation outside every
fitted support has zero likelihood under all classes and is assigned to
no class. The baseline is univariate QDA with an atypicality cutoff: a
normal fit per class, with observations whose two-sided tail probability
2(1 - Phi(|z|)) falls below the cutoff under every class likewise
rejected. ``run_split_study`` repeats random train/test splits and
aggregates the confusion matrices elementwise (mean and sd across
splits).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import special as _sp

from .simulate import mix64
from .solver import EsConfig, fit
from .specfns import SQRT_2PI
from .truncnorm import TnParams, density

__all__ = [
    "NO_CLASS",
    "ClassModel",
    "ConfusionSummary",
    "fit_tqda",
    "predict_tqda",
    "fit_qda_atypicality",
    "predict_qda",
    "run_split_study",
]

NO_CLASS = "no_class"


@dataclass(frozen=True)
class ClassModel:
    """Per-class fits plus priors; kind is 'tqda' (TnParams per label) or
    'qda' ((mean, sd) per label)."""

    kind: str
    labels: tuple[str, ...]
    params: dict
    priors: dict

    def __post_init__(self):
        if self.kind not in ("tqda", "qda"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if set(self.labels) != set(self.params) or set(self.labels) != set(self.priors):
            raise ValueError("labels, params and priors must cover the same classes")
        total = sum(self.priors.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"priors must sum to 1, got {total}")


def _group(train: Iterable[tuple[str, float]]) -> dict[str, np.ndarray]:
    grouped: dict[str, list[float]] = {}
    for label, value in train:
        grouped.setdefault(str(label), []).append(float(value))
    return {label: np.array(vals) for label, vals in grouped.items()}


def fit_tqda(train: Iterable[tuple[str, float]], config: EsConfig = EsConfig()) -> ClassModel:
    """Truncated normal per class via the ES solver (sample-stats init);
    priors are the class proportions."""
    grouped = _group(train)
    if not grouped:
        raise ValueError("training set is empty")
    total = sum(v.size for v in grouped.values())
    params: dict[str, TnParams] = {}
    priors: dict[str, float] = {}
    for label in sorted(grouped):
        vals = grouped[label]
        if vals.size < 3:
            raise ValueError(f"class {label!r} has {vals.size} observations; need >= 3")
        params[label] = fit(vals, config=config).theta_hat
        priors[label] = vals.size / total
    return ClassModel(kind="tqda", labels=tuple(sorted(grouped)), params=params, priors=priors)


def predict_tqda(model: ClassModel, x: float) -> str:
    """Most likely class by prior * density, or NO_CLASS when the point is
    outside every fitted support. Ties break to the first label."""
    if model.kind != "tqda":
        raise ValueError("model was not fitted by fit_tqda")
    best_label = NO_CLASS
    best_score = 0.0
    for label in model.labels:
        score = model.priors[label] * density(model.params[label], float(x))
        if score > best_score:
            best_label, best_score = label, score
    return best_label


def fit_qda_atypicality(train: Iterable[tuple[str, float]]) -> ClassModel:
    """Normal (mean, sd) per class; priors are the class proportions."""
    grouped = _group(train)
    if not grouped:
        raise ValueError("training set is empty")
    total = sum(v.size for v in grouped.values())
    params: dict[str, tuple[float, float]] = {}
    priors: dict[str, float] = {}
    for label in sorted(grouped):
        vals = grouped[label]
        if vals.size < 2:
            raise ValueError(f"class {label!r} has {vals.size} observations; need >= 2")
        sd = float(np.std(vals, ddof=1))
        if sd == 0.0:
            raise ValueError(f"class {label!r} has zero standard deviation")
        params[label] = (float(np.mean(vals)), sd)
        priors[label] = vals.size / total
    return ClassModel(kind="qda", labels=tuple(sorted(grouped)), params=params, priors=priors)


def predict_qda(model: ClassModel, x: float, cutoff: float = 0.05) -> str:
    """Argmax of prior * normal density unless the point is atypical
    (two-sided tail probability strictly below the cutoff) for every
    class, in which case NO_CLASS."""
    if model.kind != "qda":
        raise ValueError("model was not fitted by fit_qda_atypicality")
    if not 0.0 < cutoff < 1.0:
        raise ValueError(f"cutoff must lie in (0, 1), got {cutoff}")
    x = float(x)
    best_label = NO_CLASS
    best_score = -1.0
    max_typicality = 0.0
    for label in model.labels:
        mean, sd = model.params[label]
        z = (x - mean) / sd
        max_typicality = max(max_typicality, 2.0 * _sp.ndtr(-abs(z)))
        score = model.priors[label] * math.exp(-0.5 * z * z) / (sd * SQRT_2PI)
        if score > best_score:
            best_label, best_score = label, score
    if max_typicality < cutoff:
        return NO_CLASS
    return best_label


@dataclass(frozen=True)
class ConfusionSummary:
    """Elementwise mean and sd of confusion counts across splits.

    Rows are true labels (known then holdout), columns the predicted known
    labels plus NO_CLASS; row sums of the means equal the per-class test
    sizes."""

    method: str
    true_labels: tuple[str, ...]
    pred_labels: tuple[str, ...]
    mean: np.ndarray
    sd: np.ndarray

    def cell(self, true_label: str, predicted: str) -> tuple[float, float]:
        i = self.true_labels.index(true_label)
        j = self.pred_labels.index(predicted)
        return float(self.mean[i, j]), float(self.sd[i, j])

    def rows(self) -> list[tuple[str, str, str, float, float]]:
        return [
            (self.method, t, p, float(self.mean[i, j]), float(self.sd[i, j]))
            for i, t in enumerate(self.true_labels)
            for j, p in enumerate(self.pred_labels)
        ]


def _split_counts(task) -> tuple[np.ndarray, np.ndarray]:
    grouped, known, holdout, split_seed, cutoff, config = task
    rng = np.random.Generator(np.random.Philox(key=split_seed))
    train: list[tuple[str, float]] = []
    test: list[tuple[str, float]] = []
    for label in known:
        vals = grouped[label]
        perm = rng.permutation(vals.size)
        half = vals.size // 2  # odd sizes floor to train
        train.extend((label, v) for v in vals[perm[:half]])
        test.extend((label, v) for v in vals[perm[half:]])
    for label in holdout:
        test.extend((label, v) for v in grouped[label])

    tqda = fit_tqda(train, config=config)
    qda = fit_qda_atypicality(train)
    true_labels = list(known) + list(holdout)
    pred_labels = list(known) + [NO_CLASS]
    t_counts = np.zeros((len(true_labels), len(pred_labels)))
    q_counts = np.zeros_like(t_counts)
    t_index = {lab: i for i, lab in enumerate(true_labels)}
    p_index = {lab: j for j, lab in enumerate(pred_labels)}
    for label, value in test:
        i = t_index[label]
        t_counts[i, p_index[predict_tqda(tqda, value)]] += 1
        q_counts[i, p_index[predict_qda(qda, value, cutoff)]] += 1
    return t_counts, q_counts


def run_split_study(
    data: Iterable[tuple[str, float]],
    known_labels: Sequence[str],
    holdout_labels: Sequence[str],
    n_splits: int,
    seed: int,
    cutoff: float = 0.05,
    config: EsConfig = EsConfig(),
    threads: int = 1,
) -> tuple[ConfusionSummary, ConfusionSummary]:
    """Repeat half/half splits of the known classes (holdout classes go
    entirely to test), fit both model families on each training set, and
    aggregate the two confusion-count matrices across splits."""
    if n_splits < 1:
        raise ValueError("n_splits must be >= 1")
    grouped = _group(data)
    known = tuple(sorted(str(k) for k in known_labels))
    holdout = tuple(sorted(str(h) for h in holdout_labels))
    if set(known) & set(holdout):
        raise ValueError("known and holdout label sets overlap")
    missing = (set(known) | set(holdout)) - set(grouped)
    if missing:
        raise ValueError(f"labels not present in data: {sorted(missing)}")
    extra = set(grouped) - (set(known) | set(holdout))
    if extra:
        raise ValueError(f"data contains labels outside known/holdout: {sorted(extra)}")
    for label in known:
        if grouped[label].size < 6:
            raise ValueError(f"known class {label!r} needs >= 6 observations")

    tasks = [
        (grouped, known, holdout, mix64(seed, s), cutoff, config)
        for s in range(n_splits)
    ]
    if threads <= 1:
        results = [_split_counts(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (threads * 8))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_split_counts, tasks, chunksize=chunk))

    t_all = np.stack([r[0] for r in results])
    q_all = np.stack([r[1] for r in results])
    ddof = 1 if n_splits > 1 else 0
    true_labels = known + holdout
    pred_labels = known + (NO_CLASS,)

    def summarize(stack: np.ndarray, method: str) -> ConfusionSummary:
        return ConfusionSummary(
            method=method,
            true_labels=true_labels,
            pred_labels=pred_labels,
            mean=stack.mean(axis=0),
            sd=stack.std(axis=0, ddof=ddof),
        )

    return summarize(t_all, "tqda"), summarize(q_all, "qda_atypicality")
