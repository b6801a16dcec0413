"""Model-based diagnosis with analytical redundancy relations (ARRs).

Two relations are built into the case-study circuit:

* ARR_1, current balance through R0 and R1::

      r1 = (V0 - V1) / R0 - (V1 - V2) / R1

* ARR_2, decay of the source-capacitor voltage difference since the last
  switch transition ``t_s``::

      r2 = (V0 - V2) - (V0x - V2x) * exp(-(t - t_s) * E / (R0 + R1))

Residuals are always evaluated against the nominal (design) parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateWindow,
    DomainError,
    InsufficientCalibration,
    LogDomainError,
    NoActiveWindow,
    NotValid,
)
from .fsm import Diagnosis, FaultSignatureMatrix, FsmKind
from .model import TIME_EPS, CircuitParams, Sample, Trace, transition_indices

THRESHOLD_FLOOR = 1e-9
IDENTIFY_GUARD_VOLTS = 1e-3
MIN_CALIBRATION_SAMPLES = 100


@dataclass(frozen=True)
class ArrDef:
    name: str
    parameters: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "parameters", frozenset(self.parameters))


ARR_1 = ArrDef("ARR_1", frozenset({"R0", "R1"}))
ARR_2 = ArrDef("ARR_2", frozenset({"R0", "R1", "C"}))
CASE_STUDY_ARRS = (ARR_1, ARR_2)
CASE_STUDY_FAULTS = ("R0", "C")


def fault_row_name(parameter: str) -> str:
    return f"Drift in {parameter}"


class Anchor(NamedTuple):
    t_s: float
    v0x: float
    v2x: float


@dataclass(frozen=True)
class Thresholds:
    thr1: float
    thr2: float
    debounce: int = 3

    def __post_init__(self):
        if not (self.thr1 > 0 and self.thr2 > 0):
            raise ValueError("thresholds must be positive")
        if int(self.debounce) != self.debounce or self.debounce < 1:
            raise ValueError("debounce must be an integer >= 1")


def arr1(sample: Sample, params: CircuitParams) -> float:
    return (sample.v0 - sample.v1) / params.r0 - (sample.v1 - sample.v2) / params.r1


def arr2(sample: Sample, params: CircuitParams, anchor: Anchor | None) -> float:
    if anchor is None:
        raise NotValid("ARR_2 is undefined before the first switch transition")
    decay = np.exp(-(sample.t - anchor.t_s) * params.elastance / (params.r0 + params.r1))
    return float((sample.v0 - sample.v2) - (anchor.v0x - anchor.v2x) * decay)


@dataclass(frozen=True, eq=False)
class ResidualTrace:
    t: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    valid2: np.ndarray
    active1: np.ndarray
    active2: np.ndarray

    def __len__(self):
        return len(self.t)

    def activation(self) -> tuple[int, int]:
        """Activation vector over the whole trace."""
        return int(self.active1.any()), int(self.active2.any())


@dataclass(frozen=True)
class ResidualRow:
    t: float
    r1: float
    r2: float
    valid2: bool
    active1: bool
    active2: bool


@dataclass
class ResidualEvaluator:
    """Streaming residual evaluation; feed samples in time order to :meth:`step`.

    The carried state (last switch state, ARR_2 anchor, debounce counters) is
    explicit, so a trace may be processed sample by sample.
    """

    params: CircuitParams
    thresholds: Thresholds
    anchor: Anchor | None = None
    last_s1: int | None = None
    count1: int = 0
    count2: int = 0

    def step(self, sample: Sample) -> ResidualRow:
        thr = self.thresholds
        r1 = arr1(sample, self.params)
        settling = False
        if self.last_s1 is not None and sample.s1 != self.last_s1:
            self.anchor = Anchor(sample.t, sample.v0, sample.v2)
            settling = True
        self.last_s1 = sample.s1

        valid2 = self.anchor is not None and not settling
        r2 = arr2(sample, self.params, self.anchor) if valid2 else float("nan")

        self.count1 = self.count1 + 1 if abs(r1) > thr.thr1 else 0
        self.count2 = self.count2 + 1 if valid2 and abs(r2) > thr.thr2 else 0
        return ResidualRow(sample.t, r1, r2, valid2,
                           self.count1 >= thr.debounce, self.count2 >= thr.debounce)


def evaluate_residuals(trace: Trace, params: CircuitParams, thr: Thresholds) -> ResidualTrace:
    ev = ResidualEvaluator(params, thr)
    rows = [ev.step(s) for s in trace]
    cols = list(zip(*((r.t, r.r1, r.r2, r.valid2, r.active1, r.active2) for r in rows)))
    return ResidualTrace(
        t=np.array(cols[0], dtype=float),
        r1=np.array(cols[1], dtype=float),
        r2=np.array(cols[2], dtype=float),
        valid2=np.array(cols[3], dtype=bool),
        active1=np.array(cols[4], dtype=bool),
        active2=np.array(cols[5], dtype=bool),
    )


def build_mb_fsm(arrs: Sequence[ArrDef], faults: Sequence[str]) -> FaultSignatureMatrix:
    fields = [[1.0 if f in a.parameters else 0.0 for a in arrs] for f in faults]
    return FaultSignatureMatrix(
        tuple(fault_row_name(f) for f in faults),
        tuple(a.name for a in arrs),
        np.array(fields, dtype=float).reshape(len(faults), len(arrs)),
        FsmKind.MODEL_BASED,
    )


def case_study_fsm() -> FaultSignatureMatrix:
    return build_mb_fsm(CASE_STUDY_ARRS, CASE_STUDY_FAULTS)


def calibrate_thresholds(healthy_traces: Sequence[Trace], params: CircuitParams,
                         k: float = 5.0, debounce: int = 3) -> Thresholds:
    """Thresholds at ``k`` standard deviations of the healthy residuals."""
    if not k > 0:
        raise ValueError("k must be positive")
    probe = Thresholds(1.0, 1.0, 1)
    r1s, r2s = [], []
    for tr in healthy_traces:
        res = evaluate_residuals(tr, params, probe)
        r1s.append(res.r1)
        r2s.append(res.r2[res.valid2])
    r1 = np.concatenate(r1s) if r1s else np.empty(0)
    r2 = np.concatenate(r2s) if r2s else np.empty(0)
    if len(r1) < MIN_CALIBRATION_SAMPLES or len(r2) < MIN_CALIBRATION_SAMPLES:
        raise InsufficientCalibration(
            f"need {MIN_CALIBRATION_SAMPLES} healthy residual samples, got {len(r1)} / {len(r2)}")
    return Thresholds(max(k * float(np.std(r1)), THRESHOLD_FLOOR),
                      max(k * float(np.std(r2)), THRESHOLD_FLOOR), debounce)


def segment_bounds(trace: Trace) -> list[tuple[int, int]]:
    """Index ranges ``[start, stop)`` between consecutive switch transitions."""
    idx = transition_indices(trace)
    stops = list(idx[1:]) + [len(trace)]
    return [(int(a), int(b)) for a, b in zip(idx, stops)]


def segment_activations(residuals: ResidualTrace, trace: Trace) -> list[tuple[float, tuple[int, int]]]:
    """Activation vector of every segment that starts at a switch transition."""
    out = []
    for a, b in segment_bounds(trace):
        out.append((float(trace.t[a]),
                    (int(residuals.active1[a:b].any()), int(residuals.active2[a:b].any()))))
    return out


def identify_r0(trace: Trace, residuals: ResidualTrace, params: CircuitParams) -> float:
    """R0 value that zeroes ARR_1, as a median over samples where ARR_1 is active."""
    mask = np.asarray(residuals.active1, dtype=bool)
    if not mask.any():
        raise NoActiveWindow("ARR_1 never activated")
    v0, v1, v2 = trace.v0[mask], trace.v1[mask], trace.v2[mask]
    keep = np.abs(v1 - v2) >= IDENTIFY_GUARD_VOLTS
    if not keep.any():
        raise DegenerateWindow("every active sample has |V1 - V2| below the guard")
    est = (v0[keep] - v1[keep]) * params.r1 / (v1[keep] - v2[keep])
    return float(np.median(est))


def identify_time_constant(trace: Trace, params: CircuitParams, window: tuple[float, float]) -> float:
    """Time constant from a least-squares fit of ``ln(V0 - V2)`` against time.

    ``window`` must start at a switch transition (or the trace start) and must
    not contain another transition.
    """
    t_s, t_end = window
    sel = np.flatnonzero((trace.t >= t_s - TIME_EPS) & (trace.t <= t_end + TIME_EPS))
    if len(sel) < 2:
        raise DegenerateWindow("window holds fewer than two samples")
    if np.any(trace.s1[sel] != trace.s1[sel[0]]):
        raise DegenerateWindow("window contains a switch transition")
    if sel[0] > 0 and trace.s1[sel[0] - 1] == trace.s1[sel[0]]:
        raise DegenerateWindow("window does not start at a switch transition")
    diff = trace.v0[sel] - trace.v2[sel]
    if np.any(diff <= 0):
        raise LogDomainError("V0 - V2 is not strictly positive inside the window")
    slope, _ = np.polyfit(trace.t[sel], np.log(diff), 1)
    if slope >= 0:
        raise LogDomainError("V0 - V2 does not decay inside the window")
    return float(-1.0 / slope)


def capacitance_factor(tau: float, params: CircuitParams) -> float:
    """Estimated C over nominal C, assuming nominal resistances."""
    return tau * params.elastance / (params.r0 + params.r1)


def charging_window(trace: Trace, min_volts: float = 0.1) -> tuple[float, float] | None:
    """First segment that starts at a switch-on transition, cut where V0 - V2 < ``min_volts``."""
    for a, b in segment_bounds(trace):
        if trace.s1[a] != 1:
            continue
        diff = trace.v0[a:b] - trace.v2[a:b]
        low = np.flatnonzero(diff < min_volts)
        stop = a + int(low[0]) if len(low) else b
        if stop - a >= 2:
            return float(trace.t[a]), float(trace.t[stop - 1])
    return None


@dataclass
class MbResult:
    residuals: ResidualTrace
    diagnosis: Diagnosis
    r0_estimate: float | None = None
    tau_estimate: float | None = None
    c_factor: float | None = None
    notes: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [self.diagnosis.describe()]
        if self.r0_estimate is not None:
            lines.append(f"R0 ~= {self.r0_estimate:.4g} ohm")
        if self.tau_estimate is not None:
            lines.append(f"tau ~= {self.tau_estimate:.4g} s")
        if self.c_factor is not None:
            lines.append(f"C ~= {self.c_factor:.4g} x nominal")
        lines.extend(self.notes)
        return "\n".join(lines)


def diagnose_trace(trace: Trace, params: CircuitParams, thr: Thresholds,
                   fsm: FaultSignatureMatrix | None = None) -> MbResult:
    """Detect, isolate and, where the signature allows, identify the fault."""
    fsm = fsm or case_study_fsm()
    res = evaluate_residuals(trace, params, thr)
    diag = fsm.diagnose(res.activation())
    out = MbResult(res, diag)
    if diag.candidates == (fault_row_name("R0"),):
        try:
            out.r0_estimate = identify_r0(trace, res, params)
        except DomainError as exc:
            out.notes.append(f"R0 identification failed: {exc}")
    elif diag.candidates == (fault_row_name("C"),):
        window = charging_window(trace)
        if window is None:
            out.notes.append("no charging window for time-constant identification")
        else:
            try:
                out.tau_estimate = identify_time_constant(trace, params, window)
                out.c_factor = capacitance_factor(out.tau_estimate, params)
            except DomainError as exc:
                out.notes.append(f"time-constant identification failed: {exc}")
    return out
