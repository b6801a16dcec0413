"""Scenario builders for the RRC case study: labelled treatment runs,
calibration runs and the train/validation datasets used by both pipelines."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .mb import Thresholds, calibrate_thresholds
from .model import CircuitParams, FaultSpec, Label, NoiseSpec, SwitchSchedule, Trace
from .simulator import SimConfig, simulate

DEFAULT_SIGMA = 0.02

TREATMENTS: dict[Label, FaultSpec | None] = {
    Label.HEALTHY: None,
    Label.R0_DOWN: FaultSpec.r0_down(0.5),
    Label.CAP_UP: FaultSpec.cap_up(2.0),
}

# Seed-stream keys so training, validation and calibration runs never share noise.
ROLE_TRAIN, ROLE_VALIDATION, ROLE_CALIBRATION = 0, 1, 2


def noise_seeds(seed: int, role: int, count: int) -> list[int]:
    ss = np.random.SeedSequence([int(seed), role])
    return [int(s.generate_state(1, np.uint64)[0]) for s in ss.spawn(count)]


def treatment_trace(label: Label | str, noise: NoiseSpec | None = None,
                    params: CircuitParams | None = None, schedule: SwitchSchedule | None = None,
                    cfg: SimConfig | None = None,
                    faults: dict[Label, FaultSpec | None] | None = None) -> Trace:
    label = Label(label)
    fault = (faults or TREATMENTS)[label]
    return simulate(params or CircuitParams.nominal(), schedule or SwitchSchedule(), fault,
                    noise, cfg or SimConfig(), label=label)


def labelled_traces(n_per_class: int, seed: int, role: int = ROLE_TRAIN,
                    sigma: float = DEFAULT_SIGMA, labels: Sequence[Label] = tuple(Label),
                    **kwargs) -> list[Trace]:
    """``n_per_class`` noisy runs of every treatment, grouped by class."""
    out = []
    for c, label in enumerate(labels):
        for s in noise_seeds(seed, role * 16 + c, n_per_class):
            out.append(treatment_trace(label, NoiseSpec(sigma, s), **kwargs))
    return out


def calibration_thresholds(params: CircuitParams | None = None, sigma: float = DEFAULT_SIGMA,
                           seed: int = 0, n_traces: int = 5, k: float = 5.0, debounce: int = 3,
                           schedule: SwitchSchedule | None = None,
                           cfg: SimConfig | None = None) -> Thresholds:
    """Thresholds from simulated healthy runs at the stated measurement precision."""
    params = params or CircuitParams.nominal()
    noise = [NoiseSpec(sigma, s) if sigma > 0 else None
             for s in noise_seeds(seed, ROLE_CALIBRATION, n_traces)]
    runs = [simulate(params, schedule or SwitchSchedule(), None, n, cfg or SimConfig(),
                     label=Label.HEALTHY) for n in noise]
    return calibrate_thresholds(runs, params, k, debounce)
