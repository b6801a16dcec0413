"""Fault signature matrices: rows are faults, columns are features or ARRs."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParseError, ShapeError, UnknownFault


class FsmKind(str, enum.Enum):
    MODEL_BASED = "ModelBased"
    EXPERIENCE_BASED = "ExperienceBased"


@dataclass(frozen=True, eq=False)
class FaultSignatureMatrix:
    faults: tuple[str, ...]
    features: tuple[str, ...]
    fields: np.ndarray
    kind: FsmKind = FsmKind.MODEL_BASED

    def __post_init__(self):
        faults = tuple(self.faults)
        features = tuple(self.features)
        fields = np.array(self.fields, dtype=float).reshape(len(faults), len(features))
        if np.any(fields < 0) or not np.all(np.isfinite(fields)):
            raise ShapeError("FSM fields must be finite and non-negative")
        if len(set(faults)) != len(faults) or len(set(features)) != len(features):
            raise ShapeError("fault and feature names must be unique")
        fields.setflags(write=False)
        object.__setattr__(self, "faults", faults)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "fields", fields)
        object.__setattr__(self, "kind", FsmKind(self.kind))

    def __eq__(self, other):
        if not isinstance(other, FaultSignatureMatrix):
            return NotImplemented
        return (self.faults == other.faults and self.features == other.features
                and self.kind == other.kind and np.array_equal(self.fields, other.fields))

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.fields == 0) | (self.fields == 1)))

    def row(self, fault: str) -> np.ndarray:
        try:
            return self.fields[self.faults.index(fault)]
        except ValueError:
            raise UnknownFault(f"unknown fault {fault!r}") from None

    def _binary_row(self, fault: str) -> np.ndarray:
        if not self.is_binary:
            raise DomainError("structural analysis needs a binary FSM; binarize it first")
        return self.row(fault)

    def binarize(self, threshold: float = 0.05) -> "FaultSignatureMatrix":
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        return FaultSignatureMatrix(self.faults, self.features,
                                    (self.fields > threshold).astype(float), self.kind)

    def detectable(self, fault: str) -> bool:
        return bool(np.any(self._binary_row(fault) == 1))

    def isolable(self, fault: str) -> bool:
        row = self._binary_row(fault)
        if not np.any(row == 1):
            return False
        others = [self.fields[i] for i, f in enumerate(self.faults) if f != fault]
        return all(not np.array_equal(row, o) for o in others)

    def isolate(self, activation: Sequence[int]) -> list[str]:
        """Faults whose signature equals ``activation`` exactly.

        An all-zero activation yields an empty list; use :meth:`diagnose` to
        tell "no fault detected" apart from "unknown fault".
        """
        act = self._activation(activation)
        if not np.any(act):
            return []
        return [f for f, row in zip(self.faults, self.fields) if np.array_equal(row, act)]

    def nearest(self, activation: Sequence[int]) -> list[str]:
        """Faults at minimum Hamming distance from ``activation`` (diagnostic only)."""
        act = self._activation(activation)
        if not self.faults:
            return []
        dist = np.sum(self.fields != act, axis=1)
        return [f for f, d in zip(self.faults, dist) if d == dist.min()]

    def diagnose(self, activation: Sequence[int]) -> "Diagnosis":
        act = self._activation(activation)
        detected = bool(np.any(act))
        candidates = self.isolate(act)
        nearest = self.nearest(act) if detected and not candidates else []
        return Diagnosis(detected, tuple(candidates), tuple(nearest))

    def _activation(self, activation) -> np.ndarray:
        act = np.asarray(activation, dtype=float).ravel()
        if act.shape != (len(self.features),):
            raise ShapeError(f"activation has {act.size} entries, FSM has {len(self.features)} features")
        if not self.is_binary:
            raise DomainError("isolation needs a binary FSM; binarize it first")
        return act

    def analysis(self) -> list[tuple[str, bool, bool]]:
        return [(f, self.detectable(f), self.isolable(f)) for f in self.faults]

    def to_text(self, digits: int = 2) -> str:
        """Tab-separated table: header of feature names, one row per fault."""
        lines = ["\t" + "\t".join(self.features)]
        for fault, row in zip(self.faults, self.fields):
            if self.kind is FsmKind.MODEL_BASED and self.is_binary:
                cells = [str(int(v)) for v in row]
            else:
                cells = [f"{v:.{digits}f}" for v in row]
            lines.append("\t".join([fault, *cells]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, kind: FsmKind | None = None) -> "FaultSignatureMatrix":
        """Parse the tab-separated layout written by :meth:`to_text`.

        Comma decimal separators are accepted.  Without an explicit ``kind`` a
        binary table is read as model-based, anything else as experience-based.
        """
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ParseError("empty FSM table")
        header = lines[0].split("\t")
        features = [h.strip() for h in header[1:]]
        if not features or any(not f for f in features):
            raise ParseError("FSM header must list feature names after a leading tab")
        faults, rows = [], []
        for n, line in enumerate(lines[1:], start=2):
            cells = line.split("\t")
            if len(cells) != len(features) + 1:
                raise ParseError(f"line {n}: expected {len(features) + 1} cells, got {len(cells)}")
            faults.append(cells[0].strip())
            try:
                rows.append([float(c.strip().replace(",", ".")) for c in cells[1:]])
            except ValueError as exc:
                raise ParseError(f"line {n}: {exc}") from None
        fields = np.array(rows, dtype=float).reshape(len(faults), len(features))
        if kind is None:
            binary = np.all((fields == 0) | (fields == 1))
            kind = FsmKind.MODEL_BASED if binary else FsmKind.EXPERIENCE_BASED
        try:
            return cls(tuple(faults), tuple(features), fields, kind)
        except ShapeError as exc:
            raise ParseError(str(exc)) from None


@dataclass(frozen=True)
class Diagnosis:
    detected: bool
    candidates: tuple[str, ...]
    nearest: tuple[str, ...] = ()

    @property
    def unknown(self) -> bool:
        return self.detected and not self.candidates

    def describe(self) -> str:
        if not self.detected:
            return "no fault detected"
        if len(self.candidates) == 1:
            return "isolated: " + self.candidates[0]
        if self.candidates:
            return "detected, not isolable: " + ", ".join(self.candidates)
        return "unknown fault (nearest: " + ", ".join(self.nearest) + ")"
