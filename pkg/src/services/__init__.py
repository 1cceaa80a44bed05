"""
Services package
Training, sweep, evaluation and explanation workflows
"""

from .evaluation_service import EvaluationService, get_evaluation_service
from .explain_service import ExplainService, get_explain_service
from .sweep_service import SweepService, get_sweep_service
from .training_service import TrainingService, get_training_service

__all__ = [
    "get_evaluation_service",
    "EvaluationService",
    "get_explain_service",
    "ExplainService",
    "get_sweep_service",
    "SweepService",
    "get_training_service",
    "TrainingService",
]
