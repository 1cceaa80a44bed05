"""
Dense float64 tensors with reverse-mode differentiation.

A ``Tensor`` produced by a differentiable op remembers its parents and a
vector-Jacobian function. ``backward`` orders the reachable graph into a
``Tape`` and replays it in reverse, visiting every node exactly once.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import ContractError, NumericalError

VJP = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_grad_enabled = True


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording within a block (evaluation, action selection)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


class Tensor:
    """A row-major float64 array, optionally a node of the autodiff graph."""

    def __init__(
        self,
        data,
        *,
        requires_grad: bool = False,
        name: Optional[str] = None,
    ) -> None:
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple[Tensor, ...] = ()
        self._vjp: Optional[VJP] = None
        self._op = ""

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, op={self._op or 'leaf'})"

    # Operator sugar; the differentiable rules live in ``ops``.
    def __add__(self, other: "Tensor") -> "Tensor":
        from src.engine import ops

        return ops.add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from src.engine import ops

        return ops.sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        from src.engine import ops

        return ops.mul(self, other)

    def __neg__(self) -> "Tensor":
        from src.engine import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from src.engine import ops

        return ops.matmul(self, other)


def make_node(data: np.ndarray, parents: Sequence[Tensor], op: str, vjp: VJP) -> Tensor:
    """Wrap an op result, linking it into the graph when gradients are needed."""
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
        out._op = op
    return out


class Tape:
    """Nodes reachable from ``root`` in topological order (inputs first)."""

    def __init__(self, root: Tensor) -> None:
        self.nodes: List[Tensor] = []
        seen = set()
        # iterative post-order DFS; deep encoder stacks exceed recursion limits
        stack: List[Tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                self.nodes.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.nodes)


def backward(loss: Tensor) -> Dict[str, np.ndarray]:
    """
    Reverse-mode pass from a scalar loss.

    Sets ``.grad`` on every node reachable from ``loss`` and returns the
    gradients of named leaf tensors (the parameters).
    """
    if loss.data.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not np.isfinite(loss.data).all():
        raise NumericalError("backward() called on a non-finite loss")
    if not loss.requires_grad:
        return {}

    tape = Tape(loss)
    for node in tape:
        node.grad = np.zeros_like(node.data)
    loss.grad = np.ones_like(loss.data)

    for node in reversed(tape.nodes):
        if node._vjp is None:
            continue
        parent_grads = node._vjp(node.grad)
        for parent, g in zip(node._parents, parent_grads):
            if g is None or not parent.requires_grad:
                continue
            parent.grad = parent.grad + g

    return {
        node.name: node.grad
        for node in tape
        if node._vjp is None and node.name is not None
    }
