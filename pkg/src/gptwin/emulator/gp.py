"""Exact GP regression: likelihood, gradients, fitting and prediction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.linalg.lapack import dpotri
from scipy.optimize import minimize

from ..errors import ArgumentError, NotPositiveDefiniteError, OptimizationFailedError
from .kernels import KERNEL_KINDS, Kernel, _as_2d
from .means import MEAN_KINDS, MeanBasis, design_matrix

__all__ = [
    "EmulatorSpec",
    "OptimizerSettings",
    "TrainedEmulator",
    "cholesky_with_jitter",
    "log_marginal_likelihood",
    "lml_gradient",
    "profile_lml",
    "fit",
    "fit_multioutput",
    "predict",
    "candidate_pool",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class EmulatorSpec:
    """Structural choice of a GP: mean basis plus kernel family."""

    mean: str
    kernel: str
    ard: bool = False

    def __post_init__(self):
        if self.mean not in MEAN_KINDS:
            raise ArgumentError(f"unknown mean kind {self.mean!r}")
        if self.kernel not in KERNEL_KINDS:
            raise ArgumentError(f"unknown kernel kind {self.kernel!r}")

    @property
    def name(self) -> str:
        return f"{MeanBasis(self.mean).name} + {self.kernel_template().name}"

    def kernel_template(self, input_dim: int = 1) -> Kernel:
        return Kernel.default(self.kernel, self.ard, input_dim)

    def n_params(self, input_dim: int = 1) -> int:
        """Coefficients + kernel hyperparameters + noise variance."""
        return (
            MeanBasis(self.mean).n_coefficients(input_dim)
            + self.kernel_template(input_dim).n_params
            + 1
        )

    def to_dict(self) -> dict:
        return {"mean": self.mean, "kernel": self.kernel, "ard": self.ard, "name": self.name}


def candidate_pool() -> list[EmulatorSpec]:
    """All 30 mean x kernel combinations, mean-major."""
    return [
        EmulatorSpec(m, k, ard)
        for m in MEAN_KINDS
        for ard in (False, True)
        for k in KERNEL_KINDS
    ]


@dataclass(frozen=True)
class OptimizerSettings:
    """Multi-start quasi-Newton settings.

    Start boxes are relative: length-scales to the input range, variances to
    the target variance. ``bounds`` factors bound the search itself.
    """

    n_starts: int = 8
    gtol: float = 1e-5
    max_iter: int = 1000
    seed: int = 0
    ell_start: tuple = (0.01, 10.0)
    sf2_start: tuple = (1e-4, 10.0)
    noise_start: tuple = (1e-8, 1.0)
    alpha_start: tuple = (0.1, 10.0)
    ell_bounds: tuple = (1e-3, 1e3)
    sf2_bounds: tuple = (1e-8, 1e6)
    noise_bounds: tuple = (1e-10, 10.0)
    alpha_bounds: tuple = (1e-3, 1e9)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.__dict__.items()}


def cholesky_with_jitter(A: np.ndarray):
    """Lower Cholesky factor of ``A``, adding diagonal jitter only if needed.

    Jitter starts at ``1e-10 * trace(A)/n`` and grows by 10x up to
    ``1e-4 * trace(A)/n``. Returns ``(L, jitter)``.
    """
    try:
        return np.linalg.cholesky(A), 0.0
    except np.linalg.LinAlgError:
        pass
    n = A.shape[0]
    base = np.trace(A) / n
    if not np.isfinite(base) or base <= 0:
        raise NotPositiveDefiniteError("covariance has non-positive trace")
    for k in range(-10, -3):
        jitter = base * 10.0**k
        try:
            return np.linalg.cholesky(A + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefiniteError(f"matrix not positive definite even with jitter {jitter:.3g}")


def _prep(X, y):
    X = _as_2d(X)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != len(X):
        raise ArgumentError("X and y lengths differ")
    if len(y) < 1:
        raise ArgumentError("need at least one training point")
    return X, y


def _lml_from_factor(L, r):
    a = cho_solve((L, True), r)
    lml = -0.5 * r @ a - np.log(np.diag(L)).sum() - 0.5 * len(r) * _LOG_2PI
    return float(lml), a


def log_marginal_likelihood(mean: MeanBasis, kernel: Kernel, noise_variance: float, X, y) -> float:
    """``log N(y | mean(X), K + noise_variance*I)`` via a Cholesky factor."""
    X, y = _prep(X, y)
    A = kernel(X) + noise_variance * np.eye(len(y))
    L, _ = cholesky_with_jitter(A)
    return _lml_from_factor(L, y - mean(X))[0]


def _cho_inverse(L):
    """Inverse of ``L @ L.T`` from its lower Cholesky factor."""
    inv, info = dpotri(L, lower=1)
    if info != 0:
        raise NotPositiveDefiniteError(f"dpotri failed with info={info}")
    inv = np.tril(inv)
    return inv + np.tril(inv, -1).T


def _grad_from_parts(L, a, dKs, noise_variance):
    Ainv = _cho_inverse(L)
    W = np.outer(a, a) - Ainv
    g = [0.5 * np.sum(W * dK) for dK in dKs]
    g.append(0.5 * noise_variance * np.trace(W))
    return np.array(g)


def lml_gradient(mean: MeanBasis, kernel: Kernel, noise_variance: float, X, y) -> np.ndarray:
    """Gradient of the log marginal likelihood w.r.t. log-hyperparameters.

    Ordered as ``kernel.get_log_params()`` followed by ``log noise_variance``;
    mean coefficients are held fixed.
    """
    X, y = _prep(X, y)
    K, dKs = kernel.matrix_and_grads(X)
    L, _ = cholesky_with_jitter(K + noise_variance * np.eye(len(y)))
    _, a = _lml_from_factor(L, y - mean(X))
    return _grad_from_parts(L, a, dKs, noise_variance)


def _gls(L, H, y):
    Hw = solve_triangular(L, H, lower=True)
    yw = solve_triangular(L, y, lower=True)
    beta, *_ = np.linalg.lstsq(Hw, yw, rcond=None)
    return beta


def profile_lml(mean_kind: str, kernel: Kernel, noise_variance: float, X, y, with_grad: bool = True, sq=None):
    """Log marginal likelihood with mean coefficients profiled out by GLS.

    Returns ``(lml, grad, beta)``. Because the coefficients maximize the
    likelihood for fixed covariance, the gradient equals the fixed-mean
    gradient at the GLS coefficients.
    """
    X, y = _prep(X, y)
    H = design_matrix(mean_kind, X)
    if with_grad:
        K, dKs = kernel.matrix_and_grads(X, sq)
    else:
        K = kernel(X)
    L, _ = cholesky_with_jitter(K + noise_variance * np.eye(len(y)))
    beta = _gls(L, H, y)
    lml, a = _lml_from_factor(L, y - H @ beta)
    grad = _grad_from_parts(L, a, dKs, noise_variance) if with_grad else None
    return lml, grad, beta


@dataclass(eq=False)
class TrainedEmulator:
    """A fitted GP. Immutable in use; the factorization is cached on creation."""

    mean: MeanBasis
    kernel: Kernel
    noise_variance: float
    X: np.ndarray
    y: np.ndarray
    lml: float | None = None
    seed: int | None = None
    spec: EmulatorSpec | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = _as_2d(self.X)
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.noise_variance < 0:
            raise ArgumentError("noise variance must be non-negative")
        if self.spec is None:
            self.spec = EmulatorSpec(self.mean.kind, self.kernel.kind, self.kernel.ard)
        K = self.kernel(self.X)
        self._K = K
        self.L, self.jitter = cholesky_with_jitter(K + self.noise_variance * np.eye(len(self.y)))
        self.alpha = cho_solve((self.L, True), self.y - self.mean(self.X))
        if self.lml is None:
            self.lml = _lml_from_factor(self.L, self.y - self.mean(self.X))[0]

    @property
    def n_params(self) -> int:
        return len(self.mean.beta) + self.kernel.n_params + 1

    def predict(self, Xs, include_noise: bool = False):
        """Posterior mean and variance at ``Xs``.

        The latent-function variance is returned by default; with
        ``include_noise`` the noise variance is added, giving the variance of
        a new observation.
        """
        Xs = _as_2d(Xs)
        Ks = self.kernel(self.X, Xs)
        mu = self.mean(Xs) + Ks.T @ self.alpha
        v = solve_triangular(self.L, Ks, lower=True)
        var = self.kernel.diag(Xs) - np.einsum("ij,ij->j", v, v)
        # round-off can push the variance slightly negative near training points
        var = np.maximum(var, 0.0)
        if include_noise:
            var = var + self.noise_variance
        return mu, var

    def band(self, Xs, observation: bool = True, z: float = 1.96):
        """``(mean, lower, upper)`` of the central band, default 95%."""
        mu, var = self.predict(Xs, include_noise=observation)
        half = z * np.sqrt(var)
        return mu, mu - half, mu + half

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "mean": self.mean.to_dict(),
            "kernel": self.kernel.to_dict(),
            "noise_variance": self.noise_variance,
            "lml": self.lml,
            "seed": self.seed,
            "n_params": self.n_params,
            "X": self.X.tolist(),
            "y": self.y.tolist(),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedEmulator":
        spec = d["spec"]
        return cls(
            mean=MeanBasis.from_dict(d["mean"]),
            kernel=Kernel.from_dict(d["kernel"]),
            noise_variance=d["noise_variance"],
            X=np.array(d["X"], dtype=float),
            y=np.array(d["y"], dtype=float),
            lml=d["lml"],
            seed=d["seed"],
            spec=EmulatorSpec(spec["mean"], spec["kernel"], spec["ard"]),
            info=d.get("info", {}),
        )

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def from_json(cls, path) -> "TrainedEmulator":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def predict(emulator: TrainedEmulator, Xs, include_noise: bool = False):
    return emulator.predict(Xs, include_noise=include_noise)


def _scales(X, y):
    span = np.ptp(X, axis=0)
    span = np.where(span > 0, span, 1.0)
    vy = float(np.var(y))
    return span, vy


def _log_box(template, settings, span, vy):
    """Per-variable ``(start_lo, start_hi, bound_lo, bound_hi)`` in log space."""
    rows = [(settings.sf2_start, settings.sf2_bounds, vy)]
    rows += [(settings.ell_start, settings.ell_bounds, s) for s in (span if template.ard else span[:1])]
    if template.kind == "rational_quadratic":
        rows.append((settings.alpha_start, settings.alpha_bounds, 1.0))
    rows.append((settings.noise_start, settings.noise_bounds, vy))
    box = np.array([[*np.log(np.array(st) * sc), *np.log(np.array(bd) * sc)] for st, bd, sc in rows])
    return box


def _degenerate_emulator(spec, template, X, y, settings):
    """Prior-mean-only emulator for targets with no variation."""
    H = design_matrix(spec.mean, X)
    beta, *_ = np.linalg.lstsq(H, y, rcond=None)
    scale = max(float(np.mean(y**2)), 1.0)
    sf2 = settings.sf2_bounds[0] * scale
    kernel = Kernel(template.kind, sf2, tuple(np.ptp(X, axis=0) if template.ard else [np.ptp(X[:, 0]) or 1.0]), template.alpha, template.ard)
    noise = settings.noise_bounds[0] * scale
    return TrainedEmulator(
        MeanBasis(spec.mean, tuple(beta)), kernel, noise, X, y,
        seed=settings.seed, spec=spec, info={"degenerate": True},
    )


def fit(spec: EmulatorSpec, X, y, settings: OptimizerSettings | None = None) -> TrainedEmulator:
    """Maximize the log marginal likelihood over hyperparameters.

    Kernel hyperparameters and the noise variance are optimized in log
    space with L-BFGS from ``settings.n_starts`` seeded log-uniform starts;
    mean coefficients are profiled out by generalized least squares at every
    evaluation. The best local optimum wins.
    """
    settings = settings or OptimizerSettings()
    X, y = _prep(X, y)
    if len(y) < 2:
        raise ArgumentError("fit needs at least two training points")
    template = spec.kernel_template(X.shape[1])
    span, vy = _scales(X, y)
    if vy <= 1e-300 * max(1.0, float(np.mean(y**2))):
        return _degenerate_emulator(spec, template, X, y, settings)

    box = _log_box(template, settings, span, vy)
    bounds = list(zip(box[:, 2], box[:, 3]))
    rng = np.random.default_rng(settings.seed)
    starts = rng.uniform(box[:, 0], box[:, 1], size=(settings.n_starts, len(box)))
    starts = np.clip(starts, box[:, 2], box[:, 3])
    n_k = template.n_params
    sq = (X[:, None, :] - X[None, :, :]) ** 2

    def objective(z):
        try:
            lml, grad, _ = profile_lml(
                spec.mean, template.with_log_params(z[:n_k]), math.exp(z[n_k]), X, y, sq=sq
            )
        except (NotPositiveDefiniteError, np.linalg.LinAlgError, FloatingPointError):
            return 1e300, np.zeros_like(z)
        if not np.isfinite(lml) or not np.all(np.isfinite(grad)):
            return 1e300, np.zeros_like(z)
        return -lml, -grad

    best = None
    n_failed = 0
    for z0 in starts:
        try:
            with np.errstate(over="ignore", under="ignore"):
                res = minimize(
                    objective, z0, jac=True, method="L-BFGS-B", bounds=bounds,
                    options={"gtol": settings.gtol, "ftol": 1e-15, "maxiter": settings.max_iter},
                )
        except (ValueError, ArithmeticError):
            n_failed += 1
            continue
        if not np.isfinite(res.fun) or res.fun >= 1e300:
            n_failed += 1
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise OptimizationFailedError(f"all {settings.n_starts} starts failed for {spec.name}")

    z = best.x
    kernel = template.with_log_params(z[:n_k])
    noise = math.exp(z[n_k])
    lml, grad, beta = profile_lml(spec.mean, kernel, noise, X, y)
    info = {
        "n_starts": settings.n_starts,
        "n_failed_starts": n_failed,
        "n_iter": int(best.nit),
        "grad_norm": float(np.linalg.norm(grad)),
        "at_bound": [bool(np.isclose(v, lo) or np.isclose(v, hi)) for v, (lo, hi) in zip(z, bounds)],
    }
    return TrainedEmulator(
        MeanBasis(spec.mean, tuple(beta)), kernel, noise, X, y,
        lml=lml, seed=settings.seed, spec=spec, info=info,
    )


def fit_multioutput(spec: EmulatorSpec, X, targets, settings: OptimizerSettings | None = None):
    """Fit independent emulators, one per output channel, on a shared input grid.

    ``targets`` is a sequence of target arrays or a mapping name -> array;
    the return value has the same shape (tuple or dict).
    """
    if isinstance(targets, dict):
        return {k: fit(spec, X, v, settings) for k, v in targets.items()}
    return tuple(fit(spec, X, v, settings) for v in targets)
