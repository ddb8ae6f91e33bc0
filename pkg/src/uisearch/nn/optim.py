"""Parameters and the plain SGD update."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch


@dataclass
class Parameter:
    """A trainable array paired with its gradient accumulator."""

    name: str
    value: np.ndarray
    grad: np.ndarray = field(init=False)

    def __post_init__(self):
        self.grad = np.zeros_like(self.value)

    def accumulate(self, g: np.ndarray) -> None:
        if g.shape != self.value.shape:
            raise ShapeMismatch(
                f"{self.name}: gradient shape {g.shape} != value shape {self.value.shape}"
            )
        self.grad += g

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def sgd_step(params: list[Parameter], lr: float) -> None:
    """value <- value - lr * grad for every parameter, then zero the grads."""
    for p in params:
        p.value -= lr * p.grad
        p.zero_grad()
