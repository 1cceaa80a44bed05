"""
Networks package
Transformer and MLP classifiers plus checkpoint I/O
"""

from .base import Classifier
from .checkpoint import apply_checkpoint, build_model, capture, load_model, save_model
from .mlp import MLPClassifier
from .transformer import TransformerClassifier, parameter_count

__all__ = [
    "Classifier",
    "MLPClassifier",
    "TransformerClassifier",
    "apply_checkpoint",
    "build_model",
    "capture",
    "load_model",
    "parameter_count",
    "save_model",
]
