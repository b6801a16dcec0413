"""Maturity assessment of a diagnosis pipeline.

Maturity grows with the decisions of the maintenance control loop that a
pipeline computes: detection gives Monitoring, isolation plus
identification give Understanding, prognosis gives Predicting and recovery
gives Deciding.  A level needs every lower-tier decision as well.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import InvalidProfile


class Decision(str, enum.Enum):
    DETECT = "Detect"
    ISOLATE = "Isolate"
    IDENTIFY = "Identify"
    PROGNOSE = "Prognose"
    RECOVER = "Recover"


class Causality(str, enum.Enum):
    ASSOCIATIONAL = "Associational"
    MODEL_BASED = "ModelBased"
    NONE = "None"


class Level(enum.IntEnum):
    NONE = 0
    MONITORING = 1
    UNDERSTANDING = 2
    PREDICTING = 3
    DECIDING = 4

    @property
    def title(self) -> str:
        return self.name.capitalize()


TIERS: tuple[tuple[Level, tuple[Decision, ...]], ...] = (
    (Level.MONITORING, (Decision.DETECT,)),
    (Level.UNDERSTANDING, (Decision.ISOLATE, Decision.IDENTIFY)),
    (Level.PREDICTING, (Decision.PROGNOSE,)),
    (Level.DECIDING, (Decision.RECOVER,)),
)

ASSOCIATIONAL_CAVEATS = (
    "decisions outside the training history are risky",
    "applicability at an unseen operating regime is unknown",
    "features need not indicate fault magnitude",
    "results depend on the arbitrary choice of classifier and importance score",
)

MODEL_BASED_NOTES = (
    "causality is inherent in the posited engineering model",
    "applicability under other switching regimes is assessable without measurement history",
    "residuals carry the fault magnitude, enabling identification",
    "threshold choice follows from measurement precision at design time",
)


@dataclass(frozen=True)
class CapabilityProfile:
    computed_decisions: frozenset[Decision]
    causality_mode: Causality = Causality.NONE
    translation_notes: str = ""
    computability_notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "computed_decisions",
                           frozenset(Decision(d) for d in self.computed_decisions))
        object.__setattr__(self, "causality_mode", Causality(self.causality_mode))


@dataclass(frozen=True)
class MaturityReport:
    level: Level
    gaps: tuple[Decision, ...]
    aspects: dict[str, dict[str, object]] = field(default_factory=dict, compare=True, hash=False)

    def to_tree(self) -> dict:
        return {"level": self.level.title, "gaps": [g.value for g in self.gaps],
                "aspects": self.aspects}

    def to_text(self) -> str:
        lines = [f"level: {self.level.title}",
                 "gaps: " + (", ".join(g.value for g in self.gaps) or "none")]
        for name, aspect in self.aspects.items():
            lines.append(f"{name}:")
            for key, value in aspect.items():
                if isinstance(value, (list, tuple)):
                    lines.append(f"  {key}:")
                    lines.extend(f"    - {v}" for v in value)
                else:
                    lines.append(f"  {key}: {value}")
        return "\n".join(lines) + "\n"


def assess(profile: CapabilityProfile) -> MaturityReport:
    have = profile.computed_decisions
    level = Level.NONE
    for tier_level, needed in TIERS:
        if all(d in have for d in needed):
            level = tier_level
        else:
            break
    gaps = tuple(d for _, needed in TIERS for d in needed if d not in have)

    mode = profile.causality_mode
    if mode is Causality.ASSOCIATIONAL:
        causality = {"status": "assigned afterwards", "notes": list(ASSOCIATIONAL_CAVEATS)}
    elif mode is Causality.MODEL_BASED:
        causality = {"status": "inherent", "notes": list(MODEL_BASED_NOTES)}
    else:
        causality = {"status": "unaddressed", "notes": []}
    aspects = {
        "decisions": {"computed": [d.value for _, ns in TIERS for d in ns if d in have]},
        "translation": {"status": "recorded" if profile.translation_notes else "unrecorded",
                        "notes": [profile.translation_notes] if profile.translation_notes else []},
        "computability": {"status": "recorded" if profile.computability_notes else "unrecorded",
                          "notes": [profile.computability_notes] if profile.computability_notes else []},
        "causality": {"mode": mode.value, **causality},
    }
    return MaturityReport(level, gaps, aspects)


class PipelineKind(str, enum.Enum):
    MB = "MB"
    EB = "EB"


def profile_from_pipeline(kind: PipelineKind | str, *, fsm: bool = False, thresholds: bool = False,
                          identifiers: bool = False, trained_model: bool = False) -> CapabilityProfile:
    """Capabilities a pipeline computes, given which of its artifacts exist."""
    kind = PipelineKind(str(kind).upper())
    if identifiers and not thresholds:
        raise InvalidProfile("identifiers need thresholds to find the active windows")
    decisions: set[Decision] = set()
    if kind is PipelineKind.MB:
        if trained_model:
            raise InvalidProfile("a model-based pipeline has no trained model")
        if thresholds:
            decisions.add(Decision.DETECT)
            if fsm:
                decisions.add(Decision.ISOLATE)
            if identifiers:
                decisions.add(Decision.IDENTIFY)
        return CapabilityProfile(
            frozenset(decisions), Causality.MODEL_BASED,
            translation_notes="faults posed as parameter drifts of the engineering model",
            computability_notes="identification only while power is exchanged after a switch transition")
    if identifiers or thresholds:
        raise InvalidProfile("an experience-based pipeline has no ARR thresholds or identifiers")
    if trained_model:
        decisions.add(Decision.DETECT)
        if fsm:
            decisions.add(Decision.ISOLATE)
    return CapabilityProfile(
        frozenset(decisions), Causality.ASSOCIATIONAL,
        translation_notes="faults limited to those present in the measurement history",
        computability_notes="model choice is arbitrary; validated on one operating regime only")


def case_study_profiles() -> dict[str, CapabilityProfile]:
    return {
        "mb": profile_from_pipeline("MB", fsm=True, thresholds=True, identifiers=True),
        "eb": profile_from_pipeline("EB", fsm=True, trained_model=True),
    }
