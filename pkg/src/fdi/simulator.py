"""Measurement traces of the RRC circuit.

Two independent solvers are provided.  ``closed_form`` chains the exact
first-order step response between sample instants with the source held at
its value at the start of each interval.  ``rk4`` integrates the state
equation ``dVc/dt = (u_Se - Vc) * E / (r0 + r1)`` with classical Runge-Kutta,
sampling the source at the midpoint of every sub-step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import (
    CircuitParams,
    FaultSpec,
    NoiseSpec,
    SwitchSchedule,
    Trace,
    effective_params,
    source_voltage,
)


class Method(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    RUNGE_KUTTA4 = "RungeKutta4"


@dataclass(frozen=True)
class SimConfig:
    duration: float = 40.0
    sample_rate: float = 10.0
    method: Method = Method.CLOSED_FORM
    rk_step: float = 0.01

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError as exc:
            raise ConfigError(f"unknown method {self.method!r}") from exc
        if not self.duration > 0:
            raise ConfigError("duration must be positive")
        if not self.sample_rate > 0:
            raise ConfigError("sample_rate must be positive")
        if not (self.rk_step > 0 and self.rk_step <= 1.0 / self.sample_rate + 1e-12):
            raise ConfigError("rk_step must lie in (0, 1/sample_rate]")

    def times(self) -> np.ndarray:
        n = int(math.floor(self.duration * self.sample_rate + 1e-9))
        return np.arange(n + 1) / self.sample_rate


def closed_form_segment(v_c_start: float, v_src: float, params: CircuitParams, dt: float) -> float:
    """Capacitor voltage after ``dt`` seconds under a constant source."""
    return v_src + (v_c_start - v_src) * math.exp(-dt * params.elastance / (params.r0 + params.r1))


def _rk4_interval(vc: float, t0: float, dt: float, rk_step: float, nominal: CircuitParams,
                  schedule: SwitchSchedule, fault: FaultSpec | None) -> float:
    n_sub = max(1, math.ceil(dt / rk_step - 1e-9))
    h = dt / n_sub
    for j in range(n_sub):
        tm = t0 + (j + 0.5) * h
        p = effective_params(nominal, fault, tm)
        u = source_voltage(schedule, nominal, tm)
        rate = p.elastance / (p.r0 + p.r1)
        k1 = (u - vc) * rate
        k2 = (u - (vc + 0.5 * h * k1)) * rate
        k3 = (u - (vc + 0.5 * h * k2)) * rate
        k4 = (u - (vc + h * k3)) * rate
        vc += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return vc


def simulate(params: CircuitParams, schedule: SwitchSchedule, fault: FaultSpec | None = None,
             noise: NoiseSpec | None = None, cfg: SimConfig | None = None, label=None) -> Trace:
    """Simulate the circuit and return sampled voltages.

    ``params`` are the nominal (design) values; ``fault`` drifts them from its
    onset on.  The capacitor starts discharged.  Noise, when given, is added
    to V0, V1 and V2 after solving.
    """
    cfg = cfg or SimConfig()
    times = cfg.times()
    dt = 1.0 / cfg.sample_rate
    n = len(times)
    v0 = np.empty(n)
    v1 = np.empty(n)
    v2 = np.empty(n)
    s1 = np.empty(n, dtype=np.int64)

    vc = 0.0
    for k, t in enumerate(times):
        p = effective_params(params, fault, t)
        x = schedule.state(t)
        u = params.source_amplitude * x
        i = (u - vc) / (p.r0 + p.r1)
        v0[k] = u
        v1[k] = u - i * p.r0
        v2[k] = vc
        s1[k] = x
        if k + 1 < n:
            if cfg.method is Method.CLOSED_FORM:
                vc = closed_form_segment(vc, u, p, dt)
            else:
                vc = _rk4_interval(vc, t, dt, cfg.rk_step, params, schedule, fault)

    if noise is not None and noise.sigma_volts > 0:
        rng = np.random.default_rng(noise.seed)
        eps = rng.normal(0.0, noise.sigma_volts, size=(3, n))
        v0 = v0 + eps[0]
        v1 = v1 + eps[1]
        v2 = v2 + eps[2]

    meta = {
        "method": cfg.method.value,
        "fault": "none" if fault is None else f"{fault.target.value}*{fault.factor!r}@{fault.onset!r}",
        "noise": "0" if noise is None else repr(noise.sigma_volts),
        "seed": "none" if noise is None else str(noise.seed),
    }
    return Trace(times, v0, v1, v2, s1, label=label, meta=meta)


def kirchhoff_residual(trace: Trace) -> np.ndarray:
    """``u_R0 + u_R1 + u_C - u_Se`` at each sample, from the measured voltages."""
    return (trace.v0 - trace.v1) + (trace.v1 - trace.v2) + trace.v2 - trace.v0
