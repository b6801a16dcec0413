"""Experience-based diagnosis: features from labelled traces, a decision
forest, permutation importance and the importance-valued signature matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientData, MissingBaseline, MissingLabel, NoTransition, ShapeError
from .forest import Forest, ForestConfig, fit_forest
from .forest import permutation_importance as _forest_importance
from .fsm import FaultSignatureMatrix, FsmKind
from .model import Label, Trace, transition_indices

FEATURES = ("V0", "V1", "V2", "T", "S1")
CLASS_ORDER = tuple(label.value for label in Label)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows of (V0, V1, V2, T, S1); T counts seconds since the latest switch transition."""

    X: np.ndarray
    labels: np.ndarray
    trace_ids: np.ndarray
    columns: tuple[str, ...] = FEATURES

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float).reshape(-1, len(self.columns))
        if np.any(~np.isfinite(X)):
            raise ShapeError("feature matrix has missing values")
        labels = np.asarray(self.labels, dtype=object)
        ids = np.asarray(self.trace_ids, dtype=np.int64)
        if not (len(X) == len(labels) == len(ids)):
            raise ShapeError("rows, labels and trace ids differ in length")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "trace_ids", ids)

    def __len__(self):
        return len(self.X)

    @property
    def classes(self) -> tuple[str, ...]:
        present = set(self.labels.tolist())
        known = [c for c in CLASS_ORDER if c in present]
        return tuple(known + sorted(present - set(known)))

    def y(self, classes: Sequence[str] | None = None) -> np.ndarray:
        classes = list(classes or self.classes)
        return np.array([classes.index(lab) for lab in self.labels], dtype=np.int64)

    def subset(self, mask) -> "FeatureMatrix":
        return FeatureMatrix(self.X[mask], self.labels[mask], self.trace_ids[mask], self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.columns.index(name)]


def trace_features(trace: Trace) -> np.ndarray:
    """Feature rows for every sample from the first switch transition on."""
    idx = transition_indices(trace)
    if len(idx) == 0:
        raise NoTransition("trace has no switch transition, so T is undefined")
    rows = np.arange(idx[0], len(trace))
    last = idx[np.searchsorted(idx, rows, side="right") - 1]
    T = trace.t[rows] - trace.t[last]
    return np.column_stack([trace.v0[rows], trace.v1[rows], trace.v2[rows], T,
                            trace.s1[rows].astype(float)])


def build_features(traces: Sequence[Trace]) -> FeatureMatrix:
    blocks, labels, ids = [], [], []
    for k, tr in enumerate(traces):
        if tr.label is None:
            raise MissingLabel(f"trace {k} has no label")
        rows = trace_features(tr)
        blocks.append(rows)
        labels.extend([tr.label.value] * len(rows))
        ids.extend([k] * len(rows))
    if not blocks:
        raise InsufficientData("no traces given")
    return FeatureMatrix(np.vstack(blocks), np.array(labels, dtype=object), np.array(ids))


def train(features: FeatureMatrix, cfg: ForestConfig | None = None) -> Forest:
    cfg = cfg or ForestConfig()
    return fit_forest(features.X, features.y(), features.classes, cfg, features.columns)


def accuracy(forest: Forest, features: FeatureMatrix) -> float:
    return forest.accuracy(features.X, features.y(forest.classes))


def permutation_importance(forest: Forest, features: FeatureMatrix, n_repeats: int = 10,
                           seed: int = 0) -> dict[str, float]:
    scores = _forest_importance(forest, features.X, features.y(forest.classes), n_repeats, seed)
    return dict(zip(features.columns, (float(s) for s in scores)))


def stratified_split(labels: np.ndarray, train_fraction: float, rng: np.random.Generator
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Boolean train/held-out masks keeping class proportions."""
    train_mask = np.zeros(len(labels), dtype=bool)
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        idx = rng.permutation(idx)
        train_mask[idx[: int(round(train_fraction * len(idx)))]] = True
    return train_mask, ~train_mask


def build_eb_fsm(traces: Sequence[Trace], cfg: ForestConfig | None = None, n_repeats: int = 10,
                 train_fraction: float = 0.7) -> FaultSignatureMatrix:
    """One importance row per fault class, from a fault-vs-Healthy forest."""
    cfg = cfg or ForestConfig()
    fm = build_features(traces)
    healthy = Label.HEALTHY.value
    if healthy not in fm.classes:
        raise MissingBaseline("no Healthy traces to contrast the faults with")
    faults = [c for c in fm.classes if c != healthy]
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for fault in faults:
        pair = fm.subset((fm.labels == healthy) | (fm.labels == fault))
        tr_mask, ho_mask = stratified_split(pair.labels, train_fraction, rng)
        train_fm, held = pair.subset(tr_mask), pair.subset(ho_mask)
        forest = fit_forest(train_fm.X, train_fm.y((healthy, fault)), (healthy, fault), cfg,
                            fm.columns)
        scores = _forest_importance(forest, held.X, held.y((healthy, fault)), n_repeats,
                                    int(rng.integers(2**63)))
        rows.append(scores)
    return FaultSignatureMatrix(tuple(faults), fm.columns,
                                np.array(rows).reshape(len(faults), len(fm.columns)),
                                FsmKind.EXPERIENCE_BASED)


def trace_verdicts(forest: Forest, features: FeatureMatrix) -> dict[int, str]:
    """Majority vote of per-sample predictions within each trace.

    Ties go to the class listed first in the forest.
    """
    pred = forest.predict_index(features.X)
    out = {}
    for tid in np.unique(features.trace_ids):
        votes = np.bincount(pred[features.trace_ids == tid], minlength=len(forest.classes))
        out[int(tid)] = forest.classes[int(np.argmax(votes))]
    return out


def independence_columns(features: FeatureMatrix) -> dict[str, np.ndarray]:
    """Feature columns plus label codes and 0/1 fault indicators, keyed for
    :func:`fdi.causal.check_independence`."""
    cols = {name: features.column(name) for name in features.columns}
    cols["label"] = features.y(CLASS_ORDER).astype(float)
    cols["R0"] = (features.labels == Label.R0_DOWN.value).astype(float)
    cols["C"] = (features.labels == Label.CAP_UP.value).astype(float)
    return cols
