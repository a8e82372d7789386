"""End-to-end evaluation of one pulse sequence."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional

from .frames import CoefficientSet, rotating_frame_coefficients
from .propagation import Propagator, make_propagator
from .pulses import (PulseEffect, PulseSpec, compose_beam_splitters, geometry_summary,
                     pulse_effects)
from .states import (DetectionResult, GaussianState, detection_probability,
                     detection_probability_general, phase_decomposition)

__all__ = ["Evaluation", "is_standard_sequence", "scenario_coefficients",
           "scenario_propagator", "evaluate_effects", "evaluate", "shift_last_phase"]


@dataclass(frozen=True)
class Evaluation:
    """Result of one run.

    ``summary`` and ``decomposition`` are ``None`` for sequences outside the
    vertex rule (impure areas or asymmetric kicks), which are evaluated via
    the full operator product; visibility and total phase are then NaN.
    """

    effects: List[PulseEffect]
    detection: DetectionResult
    summary: Optional[object] = None
    decomposition: Optional[dict] = None
    path: str = "vertex"


def is_standard_sequence(pulses: List[PulseSpec], tol: float = 1e-12) -> bool:
    """``pi/2 - pi - ... - pi - pi/2`` with symmetric kicks."""
    if len(pulses) < 3:
        return False
    for i, p in enumerate(pulses):
        target = math.pi / 2 if i in (0, len(pulses) - 1) else math.pi
        if abs(p.area - target) > tol or not p.symmetric:
            return False
    return True


def scenario_coefficients(scenario) -> CoefficientSet:
    return rotating_frame_coefficients(scenario.gravity, scenario.frame, scenario.mass)


def scenario_propagator(scenario) -> Propagator:
    return make_propagator(scenario_coefficients(scenario), scenario.method)


def evaluate_effects(effects: List[PulseEffect], state: GaussianState, standard: bool = True) -> Evaluation:
    if standard:
        summary = geometry_summary(effects)
        det = detection_probability(summary, state)
        return Evaluation(effects, det, summary, phase_decomposition(summary, state), "vertex")
    U = compose_beam_splitters(effects)
    P = detection_probability_general(U[0][0], state)
    sign = -1 if (len(effects) - 1) % 2 else 1
    det = DetectionResult(P, float("nan"), float("nan"), sign)
    return Evaluation(effects, det, None, None, "operator")


def evaluate(pulses: List[PulseSpec], propagator: Propagator, state: GaussianState,
             t0: Optional[float] = None) -> Evaluation:
    """Propagate, aggregate and compute the ground-port probability."""
    effects = pulse_effects(pulses, propagator, t0)
    return evaluate_effects(effects, state, is_standard_sequence(pulses))


def shift_last_phase(effects: List[PulseEffect], delta: float) -> List[PulseEffect]:
    """Effects with ``delta`` added to the laser phase of the final pulse."""
    last = effects[-1]
    Phi_d = None if last.Phi_down is None else last.Phi_down + delta
    return list(effects[:-1]) + [replace(last, Phi=last.Phi + delta, Phi_down=Phi_d)]

