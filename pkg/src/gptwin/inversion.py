"""Closed-form inversion of frequency measurements into mass/stiffness deltas.

All functions take frequencies already divided by ``omega0`` and work on
scalars or arrays. Distances are signed (nominal minus measured) so that
frequency increases map to negative distances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._format import write_csv
from .dynamics import COMPLEX_EIGENVALUE, DAMPED_FREQUENCY, MeasurementSeries, NominalSystem
from .errors import ArgumentError, DomainError, SingularInversionError

__all__ = [
    "invert_stiffness",
    "invert_mass",
    "invert_joint",
    "invert_series",
    "DeltaEstimateSeries",
    "SINGULAR_TOL",
]

SINGULAR_TOL = 1e-12
CASES = ("stiffness", "mass", "joint")


def invert_stiffness(omega_ds_norm, sys: NominalSystem):
    """Stiffness delta from a damped frequency, mass held at nominal."""
    w = np.asarray(omega_ds_norm, dtype=float)
    if np.any(w <= 0):
        raise ArgumentError("measured damped frequency must be positive")
    s = sys.omega_d0_norm
    d1 = s - w
    return -d1 * (2.0 * s - d1)


def _mass_terms(w, sys):
    zeta2 = sys.zeta0**2
    s = sys.omega_d0_norm
    d2 = s - w
    denom = 2.0 * (s - d2) ** 2
    inner = 1.0 - 4.0 * d2**2 * zeta2 + 8.0 * d2 * s * zeta2 - 4.0 * zeta2 + 4.0 * zeta2**2
    head = -2.0 * d2**2 + 4.0 * d2 * s - 1.0 + 2.0 * zeta2
    return head, inner, denom


def invert_mass(omega_ds_norm, sys: NominalSystem, clamp: bool = False, return_flags: bool = False):
    """Mass delta from a damped frequency, stiffness held at nominal.

    Uses the principal root of the quadratic in ``1 + delta_m``. A negative
    radicand means no mass change can produce the measured frequency; it
    raises :class:`DomainError` unless ``clamp`` is set, in which case the
    radicand is clamped to zero and the sample is flagged.
    """
    w = np.asarray(omega_ds_norm, dtype=float)
    if np.any(np.abs(w) < SINGULAR_TOL):
        raise SingularInversionError("measured damped frequency is zero")
    if np.any(w < 0):
        raise ArgumentError("measured damped frequency must be positive")
    head, inner, denom = _mass_terms(w, sys)
    flags = inner < 0
    if np.any(flags) and not clamp:
        raise DomainError("no mass change reproduces the measured frequency")
    dm = (head + np.sqrt(np.maximum(inner, 0.0))) / denom
    return (dm, flags) if return_flags else dm


def invert_joint(re_norm, im_norm, sys: NominalSystem):
    """Mass and stiffness deltas from the real and imaginary eigenvalue parts.

    Returns ``(delta_m, delta_k)``. The real part pins the mass alone
    (``Re lambda_s / omega0 = -zeta0 / (1 + delta_m)``); the imaginary part
    then fixes the stiffness.
    """
    re = np.asarray(re_norm, dtype=float)
    im = np.asarray(im_norm, dtype=float)
    if np.any(im <= 0):
        raise ArgumentError("imaginary part must be positive")
    zeta0 = sys.zeta0
    s = sys.omega_d0_norm
    d_r = -zeta0 - re
    d_i = s - im
    den = zeta0 + d_r
    if np.any(np.abs(den) < SINGULAR_TOL):
        raise SingularInversionError("real part too close to zero; mass is not identifiable")
    dm = -d_r / den
    dk = (zeta0 * d_r**2 - (1.0 - 2.0 * zeta0**2) * d_r - 2.0 * zeta0 * s * d_i + zeta0 * d_i**2) / den
    return dm, dk


@dataclass
class DeltaEstimateSeries:
    """Noisy delta estimates that become GP training targets.

    A ``None`` estimate means the channel is not identified by the source
    measurements. ``flagged`` marks samples whose measurement fell outside
    the model's range and was clamped.
    """

    slow_times: np.ndarray
    source_kind: str
    case: str
    delta_k_hat: np.ndarray | None = None
    delta_m_hat: np.ndarray | None = None
    flagged: np.ndarray | None = None
    T0: float = 1.0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.slow_times = np.asarray(self.slow_times, dtype=float)
        n = len(self.slow_times)
        for name in ("delta_k_hat", "delta_m_hat"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != (n,):
                    raise ArgumentError(f"{name} length differs from slow_times")
                if not np.all(np.isfinite(v)):
                    raise ArgumentError(f"{name} contains non-finite values")
                setattr(self, name, v)
        if self.delta_k_hat is None and self.delta_m_hat is None:
            raise ArgumentError("at least one delta channel is required")
        self.flagged = np.zeros(n, bool) if self.flagged is None else np.asarray(self.flagged, bool)

    def __len__(self):
        return len(self.slow_times)

    def targets(self) -> dict:
        """Channel name -> estimate array, for the channels present."""
        out = {}
        if self.delta_k_hat is not None:
            out["stiffness"] = self.delta_k_hat
        if self.delta_m_hat is not None:
            out["mass"] = self.delta_m_hat
        return out

    def to_csv(self, path) -> None:
        n = len(self)
        dk = self.delta_k_hat if self.delta_k_hat is not None else [None] * n
        dm = self.delta_m_hat if self.delta_m_hat is not None else [None] * n
        rows = [
            [t / self.T0, a, b, f]
            for t, a, b, f in zip(self.slow_times, dk, dm, self.flagged)
        ]
        write_csv(path, ["t_s_over_T0", "delta_k_hat", "delta_m_hat", "flagged"], rows)

    def to_dict(self) -> dict:
        def lst(v):
            return None if v is None else v.tolist()

        return {
            "case": self.case,
            "source_kind": self.source_kind,
            "T0": self.T0,
            "slow_times": self.slow_times.tolist(),
            "delta_k_hat": lst(self.delta_k_hat),
            "delta_m_hat": lst(self.delta_m_hat),
            "flagged": self.flagged.astype(int).tolist(),
            "provenance": self.provenance,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "DeltaEstimateSeries":
        def arr(v):
            return None if v is None else np.array(v, dtype=float)

        return cls(
            slow_times=np.array(d["slow_times"], dtype=float),
            source_kind=d["source_kind"],
            case=d["case"],
            delta_k_hat=arr(d["delta_k_hat"]),
            delta_m_hat=arr(d["delta_m_hat"]),
            flagged=np.array(d["flagged"], dtype=bool),
            T0=d.get("T0", 1.0),
            provenance=d.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, path) -> "DeltaEstimateSeries":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _default_case(series: MeasurementSeries) -> str:
    if series.kind == COMPLEX_EIGENVALUE:
        return "joint"
    return "mass" if series.profile.channels == ("mass",) else "stiffness"


def invert_series(
    series: MeasurementSeries,
    sys: NominalSystem | None = None,
    case: str | None = None,
    source: str | None = None,
) -> DeltaEstimateSeries:
    """Invert every sample of a measurement series.

    Out-of-range noisy samples are clamped to the nearest admissible value
    and flagged rather than dropped, so the slow-time grid stays complete.
    """
    sys = series.system if sys is None else sys
    case = _default_case(series) if case is None else case
    if case not in CASES:
        raise ArgumentError(f"case must be one of {CASES}, got {case!r}")
    expected = COMPLEX_EIGENVALUE if case == "joint" else DAMPED_FREQUENCY
    if series.kind != expected:
        raise ArgumentError(f"case {case!r} needs {expected} measurements, got {series.kind}")

    floor = 1e-6
    dk = dm = None
    if case == "joint":
        re = series.values[:, 0].copy()
        im = series.values[:, 1].copy()
        # Re lambda must stay negative and Im positive for a damped oscillator.
        bad_re = re > -floor * sys.zeta0
        bad_im = im < floor
        re[bad_re] = -floor * sys.zeta0
        im[bad_im] = floor
        flagged = bad_re | bad_im
        dm, dk = invert_joint(re, im, sys)
    else:
        w = series.values.copy()
        flagged = w < floor
        w[flagged] = floor
        if case == "stiffness":
            dk = invert_stiffness(w, sys)
        else:
            dm, mass_flags = invert_mass(w, sys, clamp=True, return_flags=True)
            flagged = flagged | mass_flags

    provenance = {
        "measurement": source,
        "system": sys.to_dict(),
        "options": {"case": case, "clamp_floor": floor},
        "noise_sigma": series.noise_sigma,
        "seed": series.seed,
    }
    return DeltaEstimateSeries(
        slow_times=series.slow_times,
        source_kind=series.kind,
        case=case,
        delta_k_hat=dk,
        delta_m_hat=dm,
        flagged=flagged,
        T0=sys.T0,
        provenance=provenance,
    )
