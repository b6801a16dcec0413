import itertools

import pytest

from fdi.errors import InvalidProfile
from fdi.maturity import (
    Causality,
    CapabilityProfile,
    Decision,
    Level,
    assess,
    case_study_profiles,
    profile_from_pipeline,
)


def level_of(*decisions):
    return assess(CapabilityProfile(frozenset(decisions))).level


@pytest.mark.parametrize("decisions, level", [
    ((), Level.NONE),
    ((Decision.DETECT,), Level.MONITORING),
    ((Decision.DETECT, Decision.ISOLATE), Level.MONITORING),
    ((Decision.DETECT, Decision.ISOLATE, Decision.IDENTIFY), Level.UNDERSTANDING),
    ((Decision.DETECT, Decision.ISOLATE, Decision.IDENTIFY, Decision.PROGNOSE), Level.PREDICTING),
    (tuple(Decision), Level.DECIDING),
    ((Decision.ISOLATE, Decision.IDENTIFY, Decision.PROGNOSE), Level.NONE),
])
def test_levels(decisions, level):
    assert level_of(*decisions) is level


def test_monotone_in_decisions():
    all_sets = [frozenset(c) for r in range(6) for c in itertools.combinations(Decision, r)]
    for a in all_sets:
        for b in all_sets:
            if a <= b:
                assert level_of(*a) <= level_of(*b)


def test_gaps_list_missing_decisions():
    report = assess(CapabilityProfile(frozenset({Decision.DETECT, Decision.ISOLATE})))
    assert report.gaps == (Decision.IDENTIFY, Decision.PROGNOSE, Decision.RECOVER)


def test_case_study_ordering():
    profiles = case_study_profiles()
    mb, eb = assess(profiles["mb"]), assess(profiles["eb"])
    assert mb.level is Level.UNDERSTANDING and eb.level is Level.MONITORING
    assert mb.level > eb.level
    assert mb.level.title == "Understanding" and eb.level.title == "Monitoring"


def test_causality_aspect():
    profiles = case_study_profiles()
    eb = assess(profiles["eb"]).to_tree()
    assert eb["aspects"]["causality"]["mode"] == "Associational"
    assert len(eb["aspects"]["causality"]["notes"]) == 4
    mb = assess(profiles["mb"]).to_tree()
    assert mb["aspects"]["causality"]["status"] == "inherent"
    assert assess(CapabilityProfile(frozenset())).aspects["causality"]["status"] == "unaddressed"


def test_report_text():
    text = assess(case_study_profiles()["mb"]).to_text()
    assert text.startswith("level: Understanding\ngaps: Prognose, Recover\n")
    assert "causality:" in text


def test_profile_accepts_strings():
    p = CapabilityProfile(frozenset({"Detect"}), "ModelBased")
    assert p.computed_decisions == {Decision.DETECT} and p.causality_mode is Causality.MODEL_BASED
    with pytest.raises(ValueError):
        CapabilityProfile(frozenset({"Guess"}))


def test_pipeline_profiles():
    assert profile_from_pipeline("mb", thresholds=True).computed_decisions == {Decision.DETECT}
    assert profile_from_pipeline("eb").computed_decisions == frozenset()
    with pytest.raises(InvalidProfile):
        profile_from_pipeline("mb", identifiers=True)
    with pytest.raises(InvalidProfile):
        profile_from_pipeline("mb", thresholds=True, trained_model=True)
    with pytest.raises(InvalidProfile):
        profile_from_pipeline("eb", thresholds=True)
    with pytest.raises(ValueError):
        profile_from_pipeline("xx")
