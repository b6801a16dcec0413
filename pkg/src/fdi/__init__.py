"""Fault detection and isolation workbench for a pulsed RRC circuit.

Model-based diagnosis (analytical redundancy relations, residual
thresholding, identification) and experience-based diagnosis (decision
forest, permutation importance) share one fault signature matrix model.
"""

from .model import CircuitParams, FaultSpec, Label, NoiseSpec, Sample, SwitchSchedule, Trace
from .simulator import SimConfig, simulate

__all__ = [
    "CircuitParams", "FaultSpec", "Label", "NoiseSpec", "Sample", "SwitchSchedule", "Trace",
    "SimConfig", "simulate",
]
__version__ = "0.1.0"
