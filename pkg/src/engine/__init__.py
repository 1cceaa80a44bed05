"""
Engine package
Dense tensors, reverse-mode gradients, layers and optimizers
"""

from .tensor import Tape, Tensor, backward, no_grad
from .optim import OptimizerState, make_optimizer, optimizer_step

__all__ = [
    "Tape",
    "Tensor",
    "backward",
    "no_grad",
    "OptimizerState",
    "make_optimizer",
    "optimizer_step",
]
