"""Random decision forest grown greedily on Gini impurity.

Trees are stored as flat node arrays so that batch prediction is a handful
of vectorised lookups per depth level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyNode, InsufficientData, ParseError, ShapeError, SingleClass

FORMAT_VERSION = 1


def gini(class_counts: Sequence[float]) -> float:
    counts = np.asarray(class_counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    n = counts.sum()
    if n == 0:
        raise EmptyNode("gini of an empty node")
    p = counts / n
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 5
    feature_subsample: int = 3
    bootstrap: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_leaf < 1 or self.feature_subsample < 1:
            raise ValueError("n_trees, max_depth, min_leaf and feature_subsample must be >= 1")

    def checked(self, n_features: int) -> "ForestConfig":
        if self.feature_subsample > n_features:
            raise ValueError(f"feature_subsample {self.feature_subsample} exceeds {n_features} features")
        return self


@dataclass(eq=False)
class Tree:
    feature: np.ndarray     # -1 marks a leaf
    threshold: np.ndarray   # rows with x <= threshold go left
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # (n_nodes, n_classes) class distribution

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            x = X[rows, np.where(internal, f, 0)]
            nxt = np.where(x <= self.threshold[node], self.left[node], self.right[node])
            node = np.where(internal, nxt, node)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def _best_split(X, y_onehot, idx, feats, min_leaf):
    """Lowest weighted child Gini over ``feats``; ties keep the first candidate."""
    n = len(idx)
    if n < 2:
        return None
    best = None
    node_onehot = y_onehot[idx]
    n_left = np.arange(1, n)
    for f in feats:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        cum = np.cumsum(node_onehot[order], axis=0)
        left, total = cum[:-1], cum[-1]
        n_right = n - n_left
        ok = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not ok.any():
            continue
        right = total - left
        # n_k * gini_k = n_k - sum(c^2) / n_k
        score = (n_left - np.sum(left ** 2, axis=1) / n_left
                 + n_right - np.sum(right ** 2, axis=1) / n_right) / n
        score = np.where(ok, score, np.inf)
        i = int(np.argmin(score))
        if best is None or score[i] < best[0]:
            lo, hi = xs[i], xs[i + 1]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (float(score[i]), int(f), float(thr))
    return best


def grow_tree(X: np.ndarray, y: np.ndarray, n_classes: int, cfg: ForestConfig,
              rng: np.random.Generator) -> Tree:
    n, n_features = X.shape
    y_onehot = np.eye(n_classes)[y]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts / counts.sum())
        return len(feature) - 1

    root_idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
    stack = [(new_node(root_idx), root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= cfg.max_depth or len(idx) < 2 * cfg.min_leaf or value[node].max() == 1.0:
            continue
        feats = rng.choice(n_features, size=cfg.feature_subsample, replace=False)
        split = _best_split(X, y_onehot, idx, feats, cfg.min_leaf)
        if split is None:
            continue
        _, f, thr = split
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value, dtype=float).reshape(-1, n_classes))


@dataclass(eq=False)
class Forest:
    trees: list[Tree]
    config: ForestConfig
    classes: tuple[str, ...]
    feature_names: tuple[str, ...] = field(default=())

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"expected rows of {self.n_features} features, got shape {X.shape}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        X = self._check(X)
        acc = np.zeros((len(X), len(self.classes)))
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)

    def predict_index(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest class index on ties
        return np.argmax(self.predict_proba(X), axis=1)

    def predict(self, row) -> tuple[str, np.ndarray]:
        """Class and averaged class distribution for a single feature vector."""
        proba = self.predict_proba(row)
        if proba.shape[0] != 1:
            raise ShapeError("predict takes a single row; use predict_labels for batches")
        return self.classes[int(np.argmax(proba[0]))], proba[0]

    def predict_labels(self, X) -> list[str]:
        return [self.classes[i] for i in self.predict_index(X)]

    def accuracy(self, X, y_index) -> float:
        return float(np.mean(self.predict_index(X) == np.asarray(y_index)))

    def to_text(self) -> str:
        c = self.config
        lines = [
            f"fdi-forest {FORMAT_VERSION}",
            "classes " + " ".join(self.classes),
            "features " + " ".join(self.feature_names),
            f"config n_trees={c.n_trees} max_depth={c.max_depth} min_leaf={c.min_leaf} "
            f"feature_subsample={c.feature_subsample} bootstrap={int(c.bootstrap)} seed={c.seed}",
        ]
        for k, tree in enumerate(self.trees):
            lines.append(f"tree {k} {tree.n_nodes}")
            for i in range(tree.n_nodes):
                if tree.feature[i] < 0:
                    dist = " ".join(repr(float(p)) for p in tree.value[i])
                    lines.append(f"leaf {i} {dist}")
                else:
                    lines.append(f"node {i} {tree.feature[i]} {float(tree.threshold[i])!r} "
                                 f"{tree.left[i]} {tree.right[i]} "
                                 + " ".join(repr(float(p)) for p in tree.value[i]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Forest":
        lines = text.splitlines()
        try:
            magic, version = lines[0].split()
            if magic != "fdi-forest" or int(version) != FORMAT_VERSION:
                raise ParseError(f"unsupported model header {lines[0]!r}")
            classes = tuple(lines[1].split()[1:])
            features = tuple(lines[2].split()[1:])
            kv = dict(item.split("=") for item in lines[3].split()[1:])
            config = ForestConfig(int(kv["n_trees"]), int(kv["max_depth"]), int(kv["min_leaf"]),
                                  int(kv["feature_subsample"]), bool(int(kv["bootstrap"])),
                                  int(kv["seed"]))
            trees, pos = [], 4
            nc = len(classes)
            while pos < len(lines):
                head = lines[pos].split()
                if head[0] != "tree":
                    raise ParseError(f"expected tree record, got {lines[pos]!r}")
                n_nodes = int(head[2])
                feat = np.full(n_nodes, -1, dtype=np.int64)
                thr = np.zeros(n_nodes)
                lft = np.full(n_nodes, -1, dtype=np.int64)
                rgt = np.full(n_nodes, -1, dtype=np.int64)
                val = np.zeros((n_nodes, nc))
                for line in lines[pos + 1: pos + 1 + n_nodes]:
                    parts = line.split()
                    i = int(parts[1])
                    if parts[0] == "leaf":
                        val[i] = [float(p) for p in parts[2:2 + nc]]
                    elif parts[0] == "node":
                        feat[i], thr[i] = int(parts[2]), float(parts[3])
                        lft[i], rgt[i] = int(parts[4]), int(parts[5])
                        val[i] = [float(p) for p in parts[6:6 + nc]]
                    else:
                        raise ParseError(f"bad node record {line!r}")
                trees.append(Tree(feat, thr, lft, rgt, val))
                pos += 1 + n_nodes
        except (IndexError, KeyError, ValueError) as exc:
            raise ParseError(f"malformed model file: {exc}") from None
        if len(trees) != config.n_trees:
            raise ParseError(f"model declares {config.n_trees} trees, found {len(trees)}")
        return cls(trees, config, classes, features)


def fit_forest(X: np.ndarray, y: np.ndarray, classes: Sequence[str], cfg: ForestConfig,
               feature_names: Sequence[str] = ()) -> Forest:
    """Grow ``cfg.n_trees`` trees; ``y`` holds indices into ``classes``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ShapeError("X must be 2-D with one label per row")
    names = tuple(feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise ShapeError("one feature name per column required")
    cfg.checked(X.shape[1])
    if len(np.unique(y)) < 2:
        raise SingleClass("training data holds a single class")
    if len(X) < 2 * cfg.min_leaf:
        raise InsufficientData(f"need at least {2 * cfg.min_leaf} rows, got {len(X)}")
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees)
    trees = [grow_tree(X, y, len(classes), cfg, np.random.default_rng(s)) for s in seeds]
    return Forest(trees, cfg, tuple(classes), names)


def permutation_importance(forest: Forest, X: np.ndarray, y: np.ndarray, n_repeats: int = 10,
                           seed: int = 0) -> np.ndarray:
    """Mean held-out accuracy drop after permuting each column, clamped at zero."""
    X = forest._check(X)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise InsufficientData("empty held-out set")
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    rng = np.random.default_rng(seed)
    base = forest.accuracy(X, y)
    out = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        drops = []
        for _ in range(n_repeats):
            Xp = X.copy()
            Xp[:, j] = rng.permutation(X[:, j])
            drops.append(base - forest.accuracy(Xp, y))
        out[j] = max(0.0, float(np.mean(drops)))
    return out


def default_feature_subsample(n_features: int) -> int:
    return math.ceil(math.sqrt(n_features))
