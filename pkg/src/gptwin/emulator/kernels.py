"""Stationary covariance kernels with log-space hyperparameter gradients.

Every kernel has a signal variance ``sf2`` and length-scale(s) ``ell``; the
rational quadratic also has a shape ``alpha``. ARD kernels carry one
length-scale per input dimension. Hyperparameters are exposed to the
optimizer as ``log`` values in the order ``[sf2, ell..., alpha]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError

__all__ = ["Kernel", "KERNEL_KINDS", "kernel_eval", "kernel_pool"]

KERNEL_KINDS = (
    "exponential",
    "squared_exponential",
    "matern32",
    "matern52",
    "rational_quadratic",
)

_DISPLAY = {
    "exponential": "Exponential",
    "squared_exponential": "Squared Exponential",
    "matern32": "Matern 3/2",
    "matern52": "Matern 5/2",
    "rational_quadratic": "Rational Quadratic",
}

_SQRT3 = np.sqrt(3.0)
_SQRT5 = np.sqrt(5.0)


def _as_2d(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        return x[:, None]
    return x


@dataclass(frozen=True)
class Kernel:
    kind: str
    sf2: float = 1.0
    ell: tuple = (1.0,)
    alpha: float | None = None
    ard: bool = False

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ArgumentError(f"unknown kernel kind {self.kind!r}")
        ell = tuple(float(v) for v in np.atleast_1d(self.ell))
        object.__setattr__(self, "ell", ell)
        if not self.ard and len(ell) != 1:
            raise ArgumentError("isotropic kernel takes a single length-scale")
        if self.kind == "rational_quadratic":
            if self.alpha is None:
                object.__setattr__(self, "alpha", 1.0)
            if not self.alpha > 0:
                raise ArgumentError("alpha must be positive")
        elif self.alpha is not None:
            raise ArgumentError(f"{self.kind} has no alpha hyperparameter")
        if not self.sf2 > 0 or not all(v > 0 for v in ell):
            raise ArgumentError("kernel hyperparameters must be strictly positive")

    @property
    def name(self) -> str:
        """Human-readable name, e.g. ``'ARD Matern 5/2'``."""
        return ("ARD " if self.ard else "") + _DISPLAY[self.kind]

    @property
    def n_params(self) -> int:
        return 1 + len(self.ell) + (self.kind == "rational_quadratic")

    @classmethod
    def default(cls, kind: str, ard: bool = False, input_dim: int = 1) -> "Kernel":
        n_ell = input_dim if ard else 1
        alpha = 1.0 if kind == "rational_quadratic" else None
        return cls(kind=kind, ell=(1.0,) * n_ell, alpha=alpha, ard=ard)

    def get_log_params(self) -> np.ndarray:
        p = [self.sf2, *self.ell]
        if self.kind == "rational_quadratic":
            p.append(self.alpha)
        return np.log(np.array(p))

    def with_log_params(self, z) -> "Kernel":
        v = np.exp(np.asarray(z, dtype=float))
        n_ell = len(self.ell)
        alpha = float(v[1 + n_ell]) if self.kind == "rational_quadratic" else None
        return Kernel(self.kind, float(v[0]), tuple(v[1 : 1 + n_ell]), alpha, self.ard)

    def param_names(self) -> list[str]:
        names = ["sf2"] + (
            [f"ell{i}" for i in range(len(self.ell))] if self.ard else ["ell"]
        )
        if self.kind == "rational_quadratic":
            names.append("alpha")
        return names

    def _scaled_sq(self, X1, X2):
        """Per-dimension squared scaled differences, shape ``(n1, n2, d)``."""
        X1 = _as_2d(X1)
        X2 = _as_2d(X2)
        d = X1.shape[1]
        if self.ard and len(self.ell) != d:
            raise ArgumentError(f"ARD kernel has {len(self.ell)} length-scales for {d}-D inputs")
        ell = np.asarray(self.ell)
        diff = (X1[:, None, :] - X2[None, :, :]) / ell
        return diff**2

    def _profile_and_factor(self, r2):
        """Covariance ``K(r2)`` and ``g(r2)`` with ``dK/dlog(ell_i) = g * r2_i``."""
        sf2 = self.sf2
        if self.kind == "squared_exponential":
            K = sf2 * np.exp(-0.5 * r2)
            return K, K
        if self.kind == "rational_quadratic":
            b = 1.0 + r2 / (2.0 * self.alpha)
            g = sf2 * b ** (-self.alpha - 1.0)
            return g * b, g
        r = np.sqrt(r2)
        if self.kind == "exponential":
            K = sf2 * np.exp(-r)
            # non-differentiable at r = 0; gradient defined as 0 there
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.where(r > 0, K / r, 0.0)
            return K, g
        if self.kind == "matern32":
            e = sf2 * np.exp(-_SQRT3 * r)
            return (1.0 + _SQRT3 * r) * e, 3.0 * e
        e = sf2 * np.exp(-_SQRT5 * r)
        a = 1.0 + _SQRT5 * r
        return (a + 5.0 * r2 / 3.0) * e, (5.0 / 3.0) * a * e

    def __call__(self, X1, X2=None) -> np.ndarray:
        """Covariance matrix between two input sets (rows are points)."""
        X2 = X1 if X2 is None else X2
        return self._profile_and_factor(self._scaled_sq(X1, X2).sum(axis=-1))[0]

    def diag(self, X) -> np.ndarray:
        return np.full(len(_as_2d(X)), self.sf2)

    def matrix_and_grads(self, X, sq=None):
        """Gram matrix and its derivatives w.r.t. each log-hyperparameter.

        ``sq`` optionally supplies precomputed unscaled squared differences
        of shape ``(n, n, d)``, which stay fixed while hyperparameters move.
        """
        if sq is None:
            sq = self._scaled_sq(X, X)
        else:
            sq = sq / np.asarray(self.ell) ** 2
        r2 = sq.sum(axis=-1)
        K, g = self._profile_and_factor(r2)
        grads = [K]
        if self.ard:
            grads.extend(g * sq[..., i] for i in range(sq.shape[-1]))
        else:
            grads.append(g * r2)
        if self.kind == "rational_quadratic":
            b = 1.0 + r2 / (2.0 * self.alpha)
            grads.append(K * (-self.alpha * np.log(b) + r2 / (2.0 * b)))
        return K, grads

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ard": self.ard,
            "name": self.name,
            "sf2": self.sf2,
            "ell": list(self.ell),
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Kernel":
        return cls(d["kind"], d["sf2"], tuple(d["ell"]), d["alpha"], d["ard"])


def kernel_eval(kernel: Kernel, x, x2) -> float:
    """Covariance between two single inputs."""
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))[None, :]
    return float(kernel(x, x2)[0, 0])


def kernel_pool(input_dim: int = 1) -> list[Kernel]:
    """The ten candidate kernels: five families, isotropic then ARD."""
    return [Kernel.default(k, ard, input_dim) for ard in (False, True) for k in KERNEL_KINDS]
