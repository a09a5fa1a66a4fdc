"""Polynomial mean bases for the GP prior."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError

__all__ = ["MeanBasis", "MEAN_KINDS", "mean_pool"]

MEAN_KINDS = ("constant", "linear", "quadratic")
_DISPLAY = {"constant": "Constant", "linear": "Linear", "quadratic": "Quadratic"}


def design_matrix(kind: str, X) -> np.ndarray:
    """Basis functions evaluated at the rows of ``X``.

    Constant gives ``[1]``, linear ``[1, x]``, quadratic ``[1, x, x**2]``
    (element-wise squares, no cross terms, for multi-dimensional inputs).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    cols = [np.ones((X.shape[0], 1))]
    if kind in ("linear", "quadratic"):
        cols.append(X)
    if kind == "quadratic":
        cols.append(X**2)
    return np.hstack(cols)


@dataclass(frozen=True)
class MeanBasis:
    kind: str
    beta: tuple = ()

    def __post_init__(self):
        if self.kind not in MEAN_KINDS:
            raise ArgumentError(f"unknown mean kind {self.kind!r}")
        object.__setattr__(self, "beta", tuple(float(b) for b in np.ravel(self.beta)))

    @property
    def name(self) -> str:
        return _DISPLAY[self.kind]

    def n_coefficients(self, input_dim: int = 1) -> int:
        return {"constant": 1, "linear": 1 + input_dim, "quadratic": 1 + 2 * input_dim}[self.kind]

    def basis(self, X) -> np.ndarray:
        return design_matrix(self.kind, X)

    def __call__(self, X) -> np.ndarray:
        H = self.basis(X)
        if len(self.beta) != H.shape[1]:
            raise ArgumentError(
                f"{self.kind} mean needs {H.shape[1]} coefficients, has {len(self.beta)}"
            )
        return H @ np.asarray(self.beta)

    def with_beta(self, beta) -> "MeanBasis":
        return MeanBasis(self.kind, tuple(np.asarray(beta, dtype=float)))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "beta": list(self.beta)}

    @classmethod
    def from_dict(cls, d: dict) -> "MeanBasis":
        return cls(d["kind"], tuple(d["beta"]))


def mean_pool() -> list[MeanBasis]:
    return [MeanBasis(k) for k in MEAN_KINDS]
