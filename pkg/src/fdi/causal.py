"""Causal DAGs: Bayesian-network factorisation, d-separation and a G-test
of conditional independence on discretised data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CycleError, InsufficientData, ParseError, UnknownNode

HIDDEN_TAG = "#hidden"
MIN_STRATUM_ROWS = 20


class Dag:
    """Immutable directed acyclic graph over named variables."""

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = (),
                 hidden: Iterable[str] = ()):
        order: dict[str, None] = dict.fromkeys(nodes)
        edge_list = []
        for a, b in edges:
            if a == b:
                raise CycleError(f"self-loop on {a!r}")
            if (a, b) in edge_list:
                raise CycleError(f"duplicate edge {a} -> {b}")
            edge_list.append((a, b))
            order.setdefault(a)
            order.setdefault(b)
        hidden = frozenset(hidden)
        for h in hidden:
            order.setdefault(h)
        self._nodes = tuple(order)
        self._edges = tuple(edge_list)
        self._hidden = hidden
        self._parents = {n: [] for n in self._nodes}
        self._children = {n: [] for n in self._nodes}
        for a, b in self._edges:
            self._parents[b].append(a)
            self._children[a].append(b)
        self._topo = self._toposort()

    def _toposort(self) -> tuple[str, ...]:
        indeg = {n: len(self._parents[n]) for n in self._nodes}
        ready = [n for n in self._nodes if indeg[n] == 0]
        out = []
        while ready:
            n = ready.pop(0)
            out.append(n)
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(out) != len(self._nodes):
            stuck = [n for n in self._nodes if indeg[n] > 0]
            raise CycleError("graph has a cycle through " + ", ".join(stuck))
        return tuple(out)

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    @property
    def hidden(self) -> frozenset[str]:
        return self._hidden

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(n for n in self._nodes if n not in self._hidden)

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def _check(self, names: Iterable[str]) -> set[str]:
        names = set(names)
        missing = names.difference(self._nodes)
        if missing:
            raise UnknownNode("unknown node(s): " + ", ".join(sorted(missing)))
        return names

    def parents(self, node: str) -> tuple[str, ...]:
        self._check([node])
        return tuple(self._parents[node])

    def children(self, node: str) -> tuple[str, ...]:
        self._check([node])
        return tuple(self._children[node])

    def ancestors(self, nodes: Iterable[str]) -> set[str]:
        return self._reach(self._check(nodes), self._parents)

    def descendants(self, nodes: Iterable[str]) -> set[str]:
        return self._reach(self._check(nodes), self._children)

    @staticmethod
    def _reach(start: set[str], step: Mapping[str, list[str]]) -> set[str]:
        seen: set[str] = set()
        todo = list(start)
        while todo:
            for m in step[todo.pop()]:
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        return seen

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return (set(self._nodes) == set(other._nodes) and set(self._edges) == set(other._edges)
                and self._hidden == other._hidden)

    def __repr__(self):
        return f"Dag(nodes={list(self._nodes)}, edges={list(self._edges)}, hidden={sorted(self._hidden)})"

    def to_text(self) -> str:
        def tag(n):
            return n + HIDDEN_TAG if n in self._hidden else n
        lines = [f"{tag(a)} -> {tag(b)}" for a, b in self._edges]
        touched = {n for e in self._edges for n in e}
        lines += [tag(n) for n in self._nodes if n not in touched]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Dag":
        """Parse ``parent -> child`` lines; a node token may end in ``#hidden``.

        A line holding a single token declares an isolated node.  Lines that
        start with ``#`` are comments.
        """
        nodes, edges, hidden = [], [], set()

        def token(raw: str, n: int) -> str:
            raw = raw.strip()
            if raw.endswith(HIDDEN_TAG):
                name = raw[: -len(HIDDEN_TAG)].strip()
                hidden.add(name)
            else:
                name = raw
            if not name or len(name.split()) != 1:
                raise ParseError(f"line {n}: bad node name {raw!r}")
            return name

        for n, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("->")
            if len(parts) == 1:
                nodes.append(token(parts[0], n))
            elif len(parts) == 2:
                a, b = token(parts[0], n), token(parts[1], n)
                nodes += [a, b]
                edges.append((a, b))
            else:
                raise ParseError(f"line {n}: expected 'parent -> child'")
        if not nodes:
            raise ParseError("DAG file declares no nodes")
        return cls(nodes, edges, hidden)


def factorization(dag: Dag) -> list[tuple[str, frozenset[str]]]:
    """Factors ``Pr(V | parents(V))`` in topological order."""
    return [(v, frozenset(dag.parents(v))) for v in dag.topological_order()]


def format_factorization(factors: Sequence[tuple[str, frozenset[str]]]) -> str:
    out = []
    for v, pa in factors:
        out.append(f"Pr({v}|{','.join(sorted(pa))})" if pa else f"Pr({v})")
    return "".join(out)


def d_separated(dag: Dag, x: Iterable[str], y: Iterable[str], z: Iterable[str] = ()) -> bool:
    """True iff every trail between ``x`` and ``y`` is blocked given ``z``.

    Uses the reachable-set traversal over (node, direction) pairs: a trail
    passes a non-collider only when it is not in ``z`` and passes a collider
    only when the collider has a descendant in ``z`` (itself included).
    """
    x, y, z = dag._check(x), dag._check(y), dag._check(z)
    if x & y or x & z or y & z:
        raise ValueError("x, y and z must be disjoint")
    opens_collider = z | dag.ancestors(z)
    up, down = 0, 1   # arrived from a child / from a parent
    todo = [(n, up) for n in x]
    seen = set()
    while todo:
        node, came = todo.pop()
        if (node, came) in seen:
            continue
        seen.add((node, came))
        if node in y:
            return False
        if came == up and node not in z:
            todo += [(p, up) for p in dag._parents[node]]
            todo += [(c, down) for c in dag._children[node]]
        elif came == down:
            if node not in z:
                todo += [(c, down) for c in dag._children[node]]
            if node in opens_collider:
                todo += [(p, up) for p in dag._parents[node]]
    return True


@dataclass(frozen=True)
class Independence:
    x: str
    y: str
    given: tuple[str, ...] = ()

    def __str__(self):
        base = f"{self.x} _||_ {self.y}"
        return base + (" | " + ", ".join(self.given) if self.given else "")


def implied_independencies(dag: Dag, max_conditioning: int = 0) -> list[Independence]:
    """Pairwise d-separations among observed nodes with ``|z| <= max_conditioning``."""
    if max_conditioning < 0:
        raise ValueError("max_conditioning must be >= 0")
    obs = dag.observed
    out = []
    for a, b in itertools.combinations(obs, 2):
        rest = [n for n in obs if n not in (a, b)]
        for size in range(min(max_conditioning, len(rest)) + 1):
            for z in itertools.combinations(rest, size):
                if d_separated(dag, {a}, {b}, set(z)):
                    out.append(Independence(a, b, z))
    return out


@dataclass(frozen=True)
class IndependenceVerdict:
    consistent: bool
    statistic: float
    dof: int
    p_value: float

    @property
    def label(self) -> str:
        return "consistent" if self.consistent else "violated"


def discretize(values: np.ndarray, bins: int = 5) -> np.ndarray:
    """Integer codes; quantile bins for columns with more than ``bins`` levels."""
    values = np.asarray(values)
    levels = np.unique(values)
    if len(levels) <= bins:
        return np.searchsorted(levels, values)
    edges = np.unique(np.quantile(values.astype(float), np.linspace(0, 1, bins + 1)[1:-1]))
    return np.searchsorted(edges, values, side="right")


def g_test(x: np.ndarray, y: np.ndarray, strata: np.ndarray) -> tuple[float, int]:
    """Likelihood-ratio statistic and degrees of freedom, summed over strata."""
    g, dof = 0.0, 0
    for s in np.unique(strata):
        m = strata == s
        xs, xi = np.unique(x[m], return_inverse=True)
        ys, yi = np.unique(y[m], return_inverse=True)
        obs = np.zeros((len(xs), len(ys)))
        np.add.at(obs, (xi, yi), 1)
        exp = obs.sum(axis=1, keepdims=True) * obs.sum(axis=0, keepdims=True) / obs.sum()
        nz = obs > 0
        g += 2.0 * float(np.sum(obs[nz] * np.log(obs[nz] / exp[nz])))
        dof += (len(xs) - 1) * (len(ys) - 1)
    return g, dof


def check_independence(data: Mapping[str, np.ndarray], statement: Independence, alpha: float = 0.01,
                       bins: int = 5) -> IndependenceVerdict:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    names = [statement.x, statement.y, *statement.given]
    missing = [n for n in names if n not in data]
    if missing:
        raise UnknownNode("no data column for: " + ", ".join(missing))
    x = discretize(data[statement.x], bins)
    y = discretize(data[statement.y], bins)
    strata = np.zeros(len(x), dtype=np.int64)
    for name in statement.given:
        codes = discretize(data[name], bins)
        strata = strata * (int(codes.max()) + 1) + codes
    _, counts = np.unique(strata, return_counts=True)
    if len(x) == 0 or counts.min() < MIN_STRATUM_ROWS:
        raise InsufficientData(f"a conditioning stratum holds fewer than {MIN_STRATUM_ROWS} rows")
    from scipy.special import chdtrc  # chi-square survival function; imported lazily, it is slow to load

    g, dof = g_test(x, y, strata)
    p = float(chdtrc(dof, g)) if dof > 0 else 1.0
    return IndependenceVerdict(p >= alpha, g, dof, p)
