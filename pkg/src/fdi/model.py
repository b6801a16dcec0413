"""Engineering model of the RRC circuit and the shared trace data model.

The circuit is a pulsed source ``u_Se = A * x`` driving R0, R1 and a storage
element in series.  The storage element is described by its elastance
``E = 1/C`` so that ``u_C = E * integral(i_C dt)`` and the time constant is
``tau = (r0 + r1) / E``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError, EmptyTrace

# Floating slack used when comparing times against switch edges.
TIME_EPS = 1e-9


class Label(str, enum.Enum):
    HEALTHY = "Healthy"
    R0_DOWN = "R0Down"
    CAP_UP = "CapUp"


class FaultTarget(str, enum.Enum):
    R0 = "R0"
    ELASTANCE = "Elastance"


@dataclass(frozen=True)
class CircuitParams:
    r0: float
    r1: float
    elastance: float
    source_amplitude: float

    def __post_init__(self):
        if not (self.r0 > 0 and self.r1 > 0 and self.elastance > 0):
            raise ConfigError("r0, r1 and elastance must be positive")
        if not self.source_amplitude >= 0:
            raise ConfigError("source_amplitude must be non-negative")

    @classmethod
    def nominal(cls) -> "CircuitParams":
        return cls(r0=1.0e4, r1=1.0e4, elastance=1.0e4, source_amplitude=5.0)

    @property
    def capacitance(self) -> float:
        return 1.0 / self.elastance

    @property
    def tau(self) -> float:
        """Time constant of the series loop in seconds."""
        return (self.r0 + self.r1) / self.elastance


@dataclass(frozen=True)
class SwitchSchedule:
    period: float = 20.0
    duty: float = 0.5
    start_state: int = 1

    def __post_init__(self):
        if not self.period > 0:
            raise ConfigError("period must be positive")
        if not 0 < self.duty < 1:
            raise ConfigError("duty must lie in (0, 1)")
        if self.start_state not in (0, 1):
            raise ConfigError("start_state must be 0 or 1")

    def state(self, t: float) -> int:
        phase = math.fmod(t, self.period)
        if self.period - phase < TIME_EPS:
            phase = 0.0
        if phase < self.duty * self.period - TIME_EPS:
            return self.start_state
        return 1 - self.start_state


@dataclass(frozen=True)
class FaultSpec:
    """A parameter drift.

    ``factor`` multiplies R0 for ``target=R0``.  For ``target=Elastance`` the
    factor is expressed on the capacitance, so the elastance is divided by it.
    """

    target: FaultTarget
    factor: float
    onset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "target", FaultTarget(self.target))
        if not self.factor > 0:
            raise ConfigError("fault factor must be positive")
        if not self.onset >= 0:
            raise ConfigError("fault onset must be non-negative")

    @classmethod
    def r0_down(cls, factor: float = 0.5, onset: float = 0.0) -> "FaultSpec":
        return cls(FaultTarget.R0, factor, onset)

    @classmethod
    def cap_up(cls, factor: float = 2.0, onset: float = 0.0) -> "FaultSpec":
        return cls(FaultTarget.ELASTANCE, factor, onset)


@dataclass(frozen=True)
class NoiseSpec:
    sigma_volts: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if not self.sigma_volts >= 0:
            raise ConfigError("sigma_volts must be non-negative")


@dataclass(frozen=True)
class Sample:
    t: float
    v0: float
    v1: float
    v2: float
    s1: int


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trace:
    """Uniformly sampled measurements of one run, stored column-wise."""

    t: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    s1: np.ndarray
    label: Label | None = None
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        cols = [_frozen(self.t, float), _frozen(self.v0, float),
                _frozen(self.v1, float), _frozen(self.v2, float),
                _frozen(self.s1, np.int64)]
        n = len(cols[0])
        if n == 0:
            raise EmptyTrace("trace has no samples")
        if any(c.ndim != 1 or len(c) != n for c in cols):
            raise ConfigError("trace columns must be 1-D and equally long")
        if n > 1:
            dt = np.diff(cols[0])
            if np.any(dt <= 0):
                raise ConfigError("trace time must increase strictly")
            if np.max(np.abs(dt - dt[0])) > TIME_EPS:
                raise ConfigError("trace sampling is not uniform")
        if not np.all((cols[4] == 0) | (cols[4] == 1)):
            raise ConfigError("s1 must be 0 or 1")
        for name, col in zip(("t", "v0", "v1", "v2", "s1"), cols):
            object.__setattr__(self, name, col)
        if self.label is not None:
            object.__setattr__(self, "label", Label(self.label))
        object.__setattr__(self, "meta", dict(self.meta))

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], label=None, meta=None) -> "Trace":
        if not samples:
            raise EmptyTrace("trace has no samples")
        cols = list(zip(*((s.t, s.v0, s.v1, s.v2, s.s1) for s in samples)))
        return cls(*cols, label=label, meta=meta or {})

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self.sample(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            all(np.array_equal(getattr(self, c), getattr(other, c))
                for c in ("t", "v0", "v1", "v2", "s1"))
            and self.label == other.label
            and dict(self.meta) == dict(other.meta)
        )

    def sample(self, i: int) -> Sample:
        return Sample(float(self.t[i]), float(self.v0[i]), float(self.v1[i]),
                      float(self.v2[i]), int(self.s1[i]))

    @property
    def samples(self) -> list[Sample]:
        return list(self)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self) > 1 else 0.0

    def with_label(self, label) -> "Trace":
        return replace(self, label=label)


def source_voltage(schedule: SwitchSchedule, params: CircuitParams, t: float) -> float:
    """Source effort ``u_Se = amplitude * x(t)`` for the pulse schedule."""
    return params.source_amplitude * schedule.state(t)


def effective_params(nominal: CircuitParams, fault: FaultSpec | None, t: float) -> CircuitParams:
    """Parameters in force at time ``t`` under a (possibly absent) drift."""
    if fault is None or t < fault.onset - TIME_EPS:
        return nominal
    if fault.target is FaultTarget.R0:
        return replace(nominal, r0=nominal.r0 * fault.factor)
    return replace(nominal, elastance=nominal.elastance / fault.factor)


def switch_transitions(trace: Trace) -> list[tuple[float, int]]:
    if len(trace) == 0:
        raise EmptyTrace("trace has no samples")
    idx = np.flatnonzero(np.diff(trace.s1)) + 1
    return [(float(trace.t[i]), int(trace.s1[i])) for i in idx]


def transition_indices(trace: Trace) -> np.ndarray:
    """Sample indices of the first sample at each new switch state."""
    return np.flatnonzero(np.diff(trace.s1)) + 1
