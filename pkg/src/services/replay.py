"""
Experience replay memory for the CDR trainer.
"""

from collections import deque
from dataclasses import dataclass
from typing import Deque, List

import numpy as np

from src.utils.errors import ConfigError, ContractError


@dataclass(frozen=True)
class ReplayEntry:
    state: int  # row index into the training arrays
    action: int
    reward: float


class ReplayMemory:
    """Bounded FIFO of (state, action, reward); the oldest entry is evicted first."""

    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ConfigError(f"replay capacity must be at least 1, got {capacity}")
        self.capacity = capacity
        self._entries: Deque[ReplayEntry] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._entries)

    def push(self, state: int, action: int, reward: float) -> None:
        if action not in (0, 1):
            raise ContractError(f"action must be 0 or 1, got {action}")
        self._entries.append(ReplayEntry(state, action, float(reward)))

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[ReplayEntry]:
        """Uniform sample without replacement."""
        if batch_size > len(self._entries):
            raise ContractError(f"cannot sample {batch_size} from {len(self._entries)} entries")
        picks = rng.choice(len(self._entries), size=batch_size, replace=False)
        return [self._entries[i] for i in picks]
