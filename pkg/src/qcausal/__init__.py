"""Classical and quantum causal models as circuits with holes.

The subpackages cover process values (:mod:`qcausal.theory`), diagrams and
their evaluation (:mod:`qcausal.diagram`), projective observations and frame
tomography (:mod:`qcausal.instruments`), and identification of interventional
channels from observations (:mod:`qcausal.identify`).
"""

from .diagram import Diagram, Model, as_comb, build_diagram, evaluate, plug
from .errors import QCausalError
from .formats import dump_model, parse_model
from .identify import (
    InterventionalChannel,
    build_counterexample_pair,
    channel_distance,
    ground_truth_channel,
    identify_front_door,
    identify_single_intervention,
    match_front_door,
    match_single_intervention,
)
from .instruments import Frame, MeasurementPlan, ObservationTable, is_positive_model, observe, standard_frame
from .theory import ProcessValue, SystemType, Theory

parse = parse_model

__all__ = [
    "Diagram",
    "Model",
    "as_comb",
    "build_diagram",
    "evaluate",
    "plug",
    "QCausalError",
    "dump_model",
    "parse_model",
    "parse",
    "InterventionalChannel",
    "build_counterexample_pair",
    "channel_distance",
    "ground_truth_channel",
    "identify_front_door",
    "identify_single_intervention",
    "match_front_door",
    "match_single_intervention",
    "Frame",
    "MeasurementPlan",
    "ObservationTable",
    "is_positive_model",
    "observe",
    "standard_frame",
    "ProcessValue",
    "SystemType",
    "Theory",
]
