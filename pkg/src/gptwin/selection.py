"""BIC model selection over the mean x kernel candidate pool."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .emulator.gp import EmulatorSpec, OptimizerSettings, TrainedEmulator, candidate_pool, fit
from .errors import ArgumentError, GPTwinError, SelectionFailedError

__all__ = ["bic_score", "CandidateRecord", "ModelSelectionReport", "select_model"]


def bic_score(k_m: int, n: int, lml: float, textbook: bool = False) -> float:
    """``k_m * ln(n) - lml``.

    With ``textbook`` the likelihood term is doubled (``k ln n - 2 lml``).
    """
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if k_m < 0:
        raise ArgumentError("k_m must be >= 0")
    return k_m * math.log(n) - (2.0 if textbook else 1.0) * lml


@dataclass
class CandidateRecord:
    """Outcome of fitting one candidate.

    For multi-output data ``emulators`` has one entry per channel, ``lml``
    is their sum and ``k_m``/``n`` count parameters and observations over
    all channels.
    """

    spec: EmulatorSpec
    k_m: int
    n: int
    lml: float
    bic: float
    fit_seconds: float
    seed: int
    error: str | None = None
    emulators: tuple = field(default=(), repr=False)

    @property
    def emulator(self) -> TrainedEmulator | None:
        return self.emulators[0] if self.emulators else None

    def to_dict(self) -> dict:
        return {
            "mean": self.spec.mean,
            "kernel": self.spec.kernel,
            "ard": self.spec.ard,
            "name": self.spec.name,
            "k_m": self.k_m,
            "n": self.n,
            "lml": self.lml if math.isfinite(self.lml) else None,
            "bic": self.bic if math.isfinite(self.bic) else None,
            "fit_seconds": self.fit_seconds,
            "seed": self.seed,
            "error": self.error,
            "fits": [
                {
                    "beta": list(em.mean.beta),
                    "kernel": em.kernel.to_dict(),
                    "noise_variance": em.noise_variance,
                    "lml": em.lml,
                }
                for em in self.emulators
            ],
        }


@dataclass
class ModelSelectionReport:
    records: list
    winner_index: int
    textbook_bic: bool = False
    channels: tuple = ("y",)

    @property
    def winner(self) -> CandidateRecord:
        return self.records[self.winner_index]

    @property
    def emulator(self) -> TrainedEmulator:
        return self.winner.emulator

    @property
    def emulators(self) -> dict:
        """Channel name -> winning emulator."""
        return dict(zip(self.channels, self.winner.emulators))

    def to_dict(self, include_timing: bool = True) -> dict:
        recs = [r.to_dict() for r in self.records]
        if not include_timing:
            for r in recs:
                r.pop("fit_seconds")
        return {
            "criterion": "k ln n - 2 L" if self.textbook_bic else "k ln n - L",
            "channels": list(self.channels),
            "winner_index": self.winner_index,
            "winner": self.winner.spec.name,
            "records": recs,
        }

    def to_json(self, path, include_timing: bool = True) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(include_timing), f, indent=2)
            f.write("\n")

    def to_table(self) -> str:
        """Plain-text table, one row per candidate, winner starred."""
        lines = [f"  {'Mean':<10}{'Covariance':<26}{'k':>3}{'n':>5}{'log L':>14}{'BIC':>14}"]
        for i, r in enumerate(self.records):
            mark = "* " if i == self.winner_index else "  "
            lml = f"{r.lml:14.4f}" if math.isfinite(r.lml) else f"{'failed':>14}"
            bic = f"{r.bic:14.4f}" if math.isfinite(r.bic) else f"{'inf':>14}"
            mean_name, kernel_name = r.spec.name.split(" + ")
            lines.append(f"{mark}{mean_name:<10}{kernel_name:<26}{r.k_m:>3}{r.n:>5}{lml}{bic}")
        return "\n".join(lines) + "\n"


def _fit_candidate(args):
    spec, X, Y, settings, textbook = args
    n_out = Y.shape[1]
    n = Y.size
    k_m = spec.n_params(X.shape[1]) * n_out
    t0 = time.perf_counter()
    try:
        ems = tuple(fit(spec, X, Y[:, j], settings) for j in range(n_out))
    except (GPTwinError, np.linalg.LinAlgError, ValueError) as exc:
        return CandidateRecord(spec, k_m, n, -math.inf, math.inf, time.perf_counter() - t0,
                               settings.seed, error=f"{type(exc).__name__}: {exc}")
    lml = float(sum(em.lml for em in ems))
    return CandidateRecord(spec, k_m, n, lml, bic_score(k_m, n, lml, textbook),
                           time.perf_counter() - t0, settings.seed, emulators=ems)


def select_model(
    X,
    y,
    pool: list[EmulatorSpec] | None = None,
    settings: OptimizerSettings | None = None,
    textbook_bic: bool = False,
    jobs: int = 1,
) -> ModelSelectionReport:
    """Fit every candidate and keep the lowest BIC.

    ``y`` is a target vector, or a mapping channel -> vector for
    independent multi-output fits sharing one mean/kernel choice. Every
    candidate uses the same optimizer seed. Ties go to the candidate with
    fewer parameters, then to the earlier one in ``pool``. Candidates that
    fail to fit get an infinite score and an error note.
    """
    pool = candidate_pool() if pool is None else list(pool)
    if not pool:
        raise ArgumentError("candidate pool is empty")
    settings = settings or OptimizerSettings()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if isinstance(y, dict):
        channels = tuple(y)
        Y = np.column_stack([np.asarray(y[c], dtype=float) for c in channels])
    else:
        channels = ("y",)
        Y = np.asarray(y, dtype=float).reshape(-1, 1)
    if len(Y) != len(X):
        raise ArgumentError("X and y lengths differ")

    tasks = [(spec, X, Y, settings, textbook_bic) for spec in pool]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_fit_candidate, tasks))
    else:
        records = [_fit_candidate(t) for t in tasks]

    ok = [i for i, r in enumerate(records) if math.isfinite(r.bic)]
    if not ok:
        raise SelectionFailedError(
            "every candidate failed to fit: " + "; ".join(r.error or "" for r in records)
        )
    winner = min(ok, key=lambda i: (records[i].bic, records[i].k_m, i))
    return ModelSelectionReport(records, winner, textbook_bic, channels)
