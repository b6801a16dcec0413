import pytest

from fdi import casestudy
from fdi.model import CircuitParams, FaultSpec, Label, SwitchSchedule
from fdi.simulator import SimConfig, simulate


@pytest.fixture(scope="session")
def nominal():
    return CircuitParams.nominal()


@pytest.fixture(scope="session")
def schedule():
    return SwitchSchedule()


@pytest.fixture(scope="session")
def clean_runs(nominal, schedule):
    """Noise-free 40 s runs of every treatment at 10 Hz."""
    return {
        "healthy": simulate(nominal, schedule, None, None, SimConfig(), label=Label.HEALTHY),
        "r0": simulate(nominal, schedule, FaultSpec.r0_down(0.5), None, SimConfig(),
                       label=Label.R0_DOWN),
        "cap": simulate(nominal, schedule, FaultSpec.cap_up(2.0), None, SimConfig(),
                        label=Label.CAP_UP),
    }


@pytest.fixture(scope="session")
def noisy_thresholds(nominal):
    return casestudy.calibration_thresholds(nominal, sigma=0.02, seed=42)


@pytest.fixture(scope="session")
def case_study_data():
    train = casestudy.labelled_traces(3, 42, casestudy.ROLE_TRAIN)
    validation = casestudy.labelled_traces(2, 42, casestudy.ROLE_VALIDATION)
    return train, validation
