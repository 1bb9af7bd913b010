"""Margin-based generalization experiments for voting classifiers."""

__version__ = "0.1.0"

from .boost import BoostConfig, run_adaboost, run_margin_booster
from .core import Hypothesis, HypothesisSet, Labeling, VotingClassifier, margin_profile
from .errors import InvariantViolation, ParameterError
from .hypo import make_spec, sample_hypothesis_set

__all__ = [
    "BoostConfig", "Hypothesis", "HypothesisSet", "InvariantViolation", "Labeling",
    "ParameterError", "VotingClassifier", "make_spec", "margin_profile", "run_adaboost",
    "run_margin_booster", "sample_hypothesis_set",
]
