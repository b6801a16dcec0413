import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdi.errors import ConfigError, EmptyTrace
from fdi.model import (
    CircuitParams,
    FaultSpec,
    FaultTarget,
    Sample,
    SwitchSchedule,
    Trace,
    effective_params,
    source_voltage,
    switch_transitions,
)


def square_trace(duration, rate, period, start=1):
    t = np.arange(int(round(duration * rate))) / rate
    s1 = np.array([start if (ti % period) < period / 2 else 1 - start for ti in t])
    z = np.zeros_like(t)
    return Trace(t, z, z, z, s1)


def test_nominal_params():
    p = CircuitParams.nominal()
    assert (p.r0, p.r1, p.elastance, p.source_amplitude) == (1.0e4, 1.0e4, 1.0e4, 5.0)
    assert p.tau == pytest.approx(2.0)


@pytest.mark.parametrize("kwargs", [
    dict(r0=0, r1=1, elastance=1, source_amplitude=1),
    dict(r0=1, r1=-1, elastance=1, source_amplitude=1),
    dict(r0=1, r1=1, elastance=0, source_amplitude=1),
    dict(r0=1, r1=1, elastance=1, source_amplitude=-0.1),
])
def test_params_reject_invalid(kwargs):
    with pytest.raises(ConfigError):
        CircuitParams(**kwargs)


@pytest.mark.parametrize("t, expected", [(3, 5.0), (15, 0.0), (20, 5.0)])
def test_source_voltage_examples(t, expected):
    sched = SwitchSchedule(period=20, duty=0.5, start_state=1)
    assert source_voltage(sched, CircuitParams.nominal(), t) == expected


def test_source_voltage_edges():
    sched = SwitchSchedule()
    p = CircuitParams.nominal()
    assert source_voltage(sched, p, 0.0) == 5.0
    assert source_voltage(sched, p, 10.0) == 0.0
    assert source_voltage(sched, p, 0.1 * 100) == 0.0
    assert source_voltage(SwitchSchedule(start_state=0), p, 0.0) == 0.0


@given(period=st.floats(0.5, 100), duty=st.floats(0.05, 0.95), start=st.sampled_from([0, 1]))
def test_source_voltage_periodic(period, duty, start):
    sched = SwitchSchedule(period, duty, start)
    p = CircuitParams.nominal()
    grid = np.linspace(0, 3 * period, 1000)
    # stay off the switching edges, where rounding decides the side
    edge = np.minimum(np.abs((grid % period) - duty * period), np.abs(grid % period))
    edge = np.minimum(edge, np.abs(period - grid % period))
    for t in grid[edge > 1e-6 * period]:
        assert source_voltage(sched, p, t) == source_voltage(sched, p, t + period)


@pytest.mark.parametrize("kwargs", [dict(period=0), dict(duty=0), dict(duty=1), dict(start_state=2)])
def test_schedule_rejects_invalid(kwargs):
    with pytest.raises(ConfigError):
        SwitchSchedule(**kwargs)


def test_effective_params_examples():
    nom = CircuitParams.nominal()
    p = effective_params(nom, FaultSpec(FaultTarget.R0, 0.5, 0), 1)
    assert p.r0 == 5.0e3 and (p.r1, p.elastance, p.source_amplitude) == (nom.r1, nom.elastance, 5.0)
    p = effective_params(nom, FaultSpec(FaultTarget.ELASTANCE, 2.0, 0), 1)
    assert p.elastance == 5.0e3 and p.r0 == nom.r0
    assert effective_params(nom, FaultSpec(FaultTarget.R0, 1.0, 0), 1) == nom
    assert effective_params(nom, None, 1) == nom


def test_effective_params_before_onset():
    nom = CircuitParams.nominal()
    assert effective_params(nom, FaultSpec.r0_down(0.5, onset=10), 9.9) == nom
    assert effective_params(nom, FaultSpec.r0_down(0.5, onset=10), 10).r0 == 5e3


@given(onset=st.floats(0, 100), dt1=st.floats(0, 1e3), dt2=st.floats(0, 1e3),
       factor=st.floats(0.1, 10), target=st.sampled_from(list(FaultTarget)))
def test_effective_params_constant_after_onset(onset, dt1, dt2, factor, target):
    nom = CircuitParams.nominal()
    fault = FaultSpec(target, factor, onset)
    assert effective_params(nom, fault, onset + dt1) == effective_params(nom, fault, onset + dt2)


def test_fault_rejects_invalid():
    with pytest.raises(ConfigError):
        FaultSpec(FaultTarget.R0, 0.0)
    with pytest.raises(ConfigError):
        FaultSpec(FaultTarget.R0, 1.0, onset=-1)


def test_switch_transitions_constant():
    z = np.zeros(5)
    assert switch_transitions(Trace(np.arange(5.0), z, z, z, np.ones(5, int))) == []


def test_switch_transitions_single_drop():
    tr = square_trace(20, 10, 20)
    assert switch_transitions(tr) == [(10.0, 0)]


def test_switch_transitions_square_wave():
    tr = square_trace(40, 10, 20)
    assert switch_transitions(tr) == [(10.0, 0), (20.0, 1), (30.0, 0)]


def test_empty_trace_rejected():
    with pytest.raises(EmptyTrace):
        Trace([], [], [], [], [])
    with pytest.raises(EmptyTrace):
        Trace.from_samples([])


def test_trace_validation():
    z = np.zeros(3)
    with pytest.raises(ConfigError):
        Trace([0, 1, 1], z, z, z, [0, 0, 0])
    with pytest.raises(ConfigError):
        Trace([0, 1, 3], z, z, z, [0, 0, 0])
    with pytest.raises(ConfigError):
        Trace([0, 1, 2], z, z, z, [0, 2, 0])


def test_trace_is_immutable_and_iterable():
    tr = Trace.from_samples([Sample(0.0, 1, 2, 3, 1), Sample(0.5, 4, 5, 6, 0)])
    with pytest.raises(ValueError):
        tr.v0[0] = 9
    assert tr.samples[1] == Sample(0.5, 4.0, 5.0, 6.0, 0)
    assert len(tr) == 2 and tr.dt == 0.5
