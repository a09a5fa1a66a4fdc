"""Physical-twin simulator for a damped single-degree-of-freedom system.

Mass and stiffness drift on a slow time ``t_s`` while the vibration happens on
a fast time ``t``. Sensors report the damped natural frequency (or the full
complex eigenvalue) at a sequence of slow-time instants.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._format import write_csv
from .errors import ArgumentError, OverdampedError

__all__ = [
    "NominalSystem",
    "EvolutionProfile",
    "MeasurementSeries",
    "sawtooth",
    "delta_k_true",
    "delta_m_true",
    "eigenvalue",
    "eigenvalue_from_deltas",
    "slow_time_grid",
    "sample_measurements",
    "channel_noise_scale",
    "DAMPED_FREQUENCY",
    "COMPLEX_EIGENVALUE",
]

DAMPED_FREQUENCY = "damped_frequency"
COMPLEX_EIGENVALUE = "complex_eigenvalue"
_KINDS = (DAMPED_FREQUENCY, COMPLEX_EIGENVALUE)
_CHANNELS = ("stiffness", "mass")
_NOISE_SCALES = ("omega0", "nominal")


@dataclass(frozen=True)
class NominalSystem:
    """Mass, damping and stiffness of the twin at ``t_s = 0``.

    The default is a unit mass with ``omega0 = 2*pi`` (so ``T0 = 1`` and slow
    time is already expressed in nominal periods) and 5% damping.
    """

    m0: float = 1.0
    c0: float = 0.2 * math.pi
    k0: float = 4.0 * math.pi**2

    def __post_init__(self):
        if not self.m0 > 0:
            raise ArgumentError(f"m0 must be positive, got {self.m0}")
        if not self.k0 > 0:
            raise ArgumentError(f"k0 must be positive, got {self.k0}")
        if not self.c0 >= 0:
            raise ArgumentError(f"c0 must be non-negative, got {self.c0}")
        if not self.zeta0 < 1:
            raise ArgumentError(
                f"underdamped required: zeta0 = {self.zeta0:.6g} must be < 1"
            )

    @classmethod
    def from_modal(cls, omega0: float = 2 * math.pi, zeta0: float = 0.05, m0: float = 1.0):
        """Build from natural frequency and damping ratio."""
        if not omega0 > 0:
            raise ArgumentError(f"omega0 must be positive, got {omega0}")
        if not 0 <= zeta0 < 1:
            raise ArgumentError(f"underdamped required: zeta0 = {zeta0} must be in [0, 1)")
        k0 = m0 * omega0**2
        c0 = 2.0 * zeta0 * math.sqrt(k0 * m0)
        return cls(m0=m0, c0=c0, k0=k0)

    @property
    def omega0(self) -> float:
        return math.sqrt(self.k0 / self.m0)

    @property
    def zeta0(self) -> float:
        return self.c0 / (2.0 * math.sqrt(self.k0 * self.m0))

    @property
    def T0(self) -> float:
        return 2.0 * math.pi / self.omega0

    @property
    def omega_d0_norm(self) -> float:
        """Nominal damped frequency divided by ``omega0``."""
        return math.sqrt(1.0 - self.zeta0**2)

    def to_dict(self) -> dict:
        return {
            "m0": self.m0,
            "c0": self.c0,
            "k0": self.k0,
            "omega0": self.omega0,
            "zeta0": self.zeta0,
            "T0": self.T0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NominalSystem":
        return cls(m0=d["m0"], c0=d["c0"], k0=d["k0"])


@dataclass(frozen=True)
class EvolutionProfile:
    """Ground-truth slow-time drift of stiffness and mass.

    Stiffness decays exponentially with a superimposed cosine ripple; mass
    follows a sawtooth (fuel burn / refuel cycles). ``channels`` lists which
    of ``"stiffness"`` and ``"mass"`` actually evolve; a disabled channel has
    zero delta everywhere.
    """

    alpha_k: float = 4e-4
    eps_k: float = 0.05
    beta_k: float = 2e-2
    beta_m: float = 0.15
    eps_m: float = 0.25
    channels: tuple = _CHANNELS

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        bad = [c for c in self.channels if c not in _CHANNELS]
        if bad:
            raise ArgumentError(f"unknown channel(s) {bad}; expected subset of {_CHANNELS}")
        if not self.eps_k > -1:
            raise ArgumentError(f"eps_k must exceed -1, got {self.eps_k}")
        if not -1 < self.eps_m < 1:
            raise ArgumentError(f"|eps_m| must be < 1 to keep the mass positive, got {self.eps_m}")
        if self.beta_m <= 0:
            raise ArgumentError(f"beta_m must be positive, got {self.beta_m}")

    @classmethod
    def for_case(cls, case: str, **overrides) -> "EvolutionProfile":
        """Profile with only the channels the named case evolves."""
        channels = {"stiffness": ("stiffness",), "mass": ("mass",), "joint": _CHANNELS}
        if case not in channels:
            raise ArgumentError(f"unknown case {case!r}")
        return cls(channels=channels[case], **overrides)

    @property
    def stiffness_enabled(self) -> bool:
        return "stiffness" in self.channels

    @property
    def mass_enabled(self) -> bool:
        return "mass" in self.channels

    def deltas(self, t_s):
        """Return ``(delta_k, delta_m)`` with disabled channels zeroed."""
        t_s = np.asarray(t_s, dtype=float)
        zero = np.zeros_like(t_s)
        dk = delta_k_true(t_s, self) if self.stiffness_enabled else zero
        dm = delta_m_true(t_s, self) if self.mass_enabled else zero
        return dk, dm

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channels"] = list(self.channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionProfile":
        return cls(**{**d, "channels": tuple(d.get("channels", _CHANNELS))})


def sawtooth(x):
    """2*pi-periodic rising sawtooth equal to ``x/pi`` on ``[-pi, pi)``."""
    x = np.asarray(x, dtype=float)
    return np.mod(x + np.pi, 2.0 * np.pi) / np.pi - 1.0


def delta_k_true(t_s, profile: EvolutionProfile):
    """Fractional stiffness change at slow time ``t_s``."""
    t_s = np.asarray(t_s, dtype=float)
    p = profile
    return np.exp(-p.alpha_k * t_s) * (1.0 + p.eps_k * np.cos(p.beta_k * t_s)) / (1.0 + p.eps_k) - 1.0


def delta_m_true(t_s, profile: EvolutionProfile):
    """Fractional mass change at slow time ``t_s``; ``-eps_m`` at ``t_s = 0``."""
    t_s = np.asarray(t_s, dtype=float)
    p = profile
    return p.eps_m * sawtooth(p.beta_m * (t_s - np.pi / p.beta_m))


def eigenvalue_from_deltas(delta_k, delta_m, sys: NominalSystem):
    """Upper eigenvalue ``-omega_s*zeta_s + i*omega_ds`` of the evolved system.

    The conjugate is the other member of the pair. Raises
    :class:`OverdampedError` wherever ``(1+dk)(1+dm) <= zeta0**2``.
    """
    dk = np.asarray(delta_k, dtype=float)
    dm = np.asarray(delta_m, dtype=float)
    zeta0 = sys.zeta0
    kk = 1.0 + dk
    mm = 1.0 + dm
    if np.any(kk <= 0) or np.any(mm <= 0):
        raise OverdampedError("stiffness and mass must stay positive")
    if np.any(kk * mm <= zeta0**2):
        raise OverdampedError(
            "underdamped required: (1+delta_k)(1+delta_m) must exceed zeta0**2"
        )
    omega_s = sys.omega0 * np.sqrt(kk) / np.sqrt(mm)
    zeta_s = zeta0 / (np.sqrt(mm) * np.sqrt(kk))
    omega_ds = omega_s * np.sqrt(1.0 - zeta_s**2)
    return -omega_s * zeta_s + 1j * omega_ds


def eigenvalue(t_s, profile: EvolutionProfile, sys: NominalSystem):
    """Upper eigenvalue of the evolved system at slow time ``t_s``."""
    dk, dm = profile.deltas(t_s)
    return eigenvalue_from_deltas(dk, dm, sys)


def slow_time_grid(n_points: int, horizon: float) -> np.ndarray:
    """Uniform grid of ``n_points`` slow times on ``[0, horizon]``."""
    if int(n_points) != n_points or n_points < 2:
        raise ArgumentError(f"n_points must be an integer >= 2, got {n_points}")
    if not horizon > 0:
        raise ArgumentError(f"horizon must be positive, got {horizon}")
    return np.linspace(0.0, float(horizon), int(n_points))


@dataclass
class MeasurementSeries:
    """Sensor readings of the evolving twin.

    ``values`` holds ``omega_ds/omega0`` (shape ``(n,)``) for the damped
    frequency kind, or ``(Re, Im)`` of ``lambda_s/omega0`` (shape ``(n, 2)``)
    for the complex eigenvalue kind.
    """

    slow_times: np.ndarray
    kind: str
    values: np.ndarray
    noise_sigma: float = 0.0
    seed: int | None = None
    profile: EvolutionProfile = field(default_factory=EvolutionProfile)
    system: NominalSystem = field(default_factory=NominalSystem)
    noise_scale: str = "omega0"

    def __post_init__(self):
        self.slow_times = np.asarray(self.slow_times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in _KINDS:
            raise ArgumentError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.slow_times.ndim != 1 or self.slow_times.size == 0:
            raise ArgumentError("slow_times must be a nonempty 1-D array")
        if np.any(np.diff(self.slow_times) <= 0):
            raise ArgumentError("slow_times must be strictly increasing")
        if len(self.values) != len(self.slow_times):
            raise ArgumentError("values and slow_times lengths differ")
        if not self.noise_sigma >= 0:
            raise ArgumentError("noise_sigma must be non-negative")

    def __len__(self):
        return len(self.slow_times)

    @property
    def columns(self) -> list[str]:
        if self.kind == DAMPED_FREQUENCY:
            return ["omega_d_over_omega0"]
        return ["re_lambda_over_omega0", "im_lambda_over_omega0"]

    def to_csv(self, path) -> None:
        vals = self.values.reshape(len(self), -1)
        rows = [[t / self.system.T0, *v] for t, v in zip(self.slow_times, vals)]
        write_csv(path, ["t_s_over_T0", *self.columns], rows)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "noise_scale": self.noise_scale,
            "system": self.system.to_dict(),
            "profile": self.profile.to_dict(),
            "slow_times": self.slow_times.tolist(),
            "values": self.values.tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementSeries":
        return cls(
            slow_times=np.array(d["slow_times"], dtype=float),
            kind=d["kind"],
            values=np.array(d["values"], dtype=float),
            noise_sigma=d["noise_sigma"],
            seed=d["seed"],
            profile=EvolutionProfile.from_dict(d["profile"]),
            system=NominalSystem.from_dict(d["system"]),
            noise_scale=d.get("noise_scale", default_noise_scale(d["kind"])),
        )

    @classmethod
    def from_json(cls, path) -> "MeasurementSeries":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def sample_measurements(
    grid: Sequence[float],
    profile: EvolutionProfile,
    sys: NominalSystem,
    kind: str = DAMPED_FREQUENCY,
    noise_sigma: float = 0.0,
    seed: int | None = None,
    noise_scale: str | None = None,
) -> MeasurementSeries:
    """Simulate sensor readings on ``grid``.

    Exact eigenvalue quantities are divided by ``omega0`` and every scalar
    channel receives independent Gaussian noise drawn from a PCG64 generator
    seeded with ``seed``.

    ``noise_scale`` sets what ``noise_sigma`` is relative to:

    ``"omega0"``
        noise standard deviation is ``noise_sigma`` on the ``omega0``-scaled
        value. Default for ``damped_frequency``.
    ``"nominal"``
        each channel's noise is ``noise_sigma`` times that channel's nominal
        magnitude, i.e. ``noise_sigma`` is a relative error. Default for
        ``complex_eigenvalue``, whose real part is only ``zeta0`` in size.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ArgumentError("grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise ArgumentError("grid must be strictly increasing")
    if not noise_sigma >= 0:
        raise ArgumentError(f"noise_sigma must be non-negative, got {noise_sigma}")
    if kind not in _KINDS:
        raise ArgumentError(f"kind must be one of {_KINDS}, got {kind!r}")

    if noise_scale is None:
        noise_scale = default_noise_scale(kind)
    lam = eigenvalue(grid, profile, sys) / sys.omega0
    if kind == DAMPED_FREQUENCY:
        exact = lam.imag
    else:
        exact = np.column_stack([lam.real, lam.imag])
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, 1.0, size=exact.shape) * noise_sigma
    noise = noise * channel_noise_scale(kind, noise_scale, sys)
    return MeasurementSeries(
        slow_times=grid,
        kind=kind,
        values=exact + noise,
        noise_sigma=float(noise_sigma),
        seed=seed,
        profile=profile,
        system=sys,
        noise_scale=noise_scale,
    )


def default_noise_scale(kind: str) -> str:
    return "nominal" if kind == COMPLEX_EIGENVALUE else "omega0"


def channel_noise_scale(kind: str, noise_scale: str, sys: NominalSystem):
    """Per-channel multiplier applied to unit-``noise_sigma`` noise."""
    if noise_scale not in _NOISE_SCALES:
        raise ArgumentError(f"noise_scale must be one of {_NOISE_SCALES}, got {noise_scale!r}")
    if noise_scale == "omega0":
        return 1.0 if kind == DAMPED_FREQUENCY else np.ones(2)
    if kind == DAMPED_FREQUENCY:
        return sys.omega_d0_norm
    return np.array([sys.zeta0, sys.omega_d0_norm])
