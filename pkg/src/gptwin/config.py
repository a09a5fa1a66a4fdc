"""Scenario configuration: defaults, TOML loading and exhaustive validation."""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .dynamics import EvolutionProfile, NominalSystem, eigenvalue
from .emulator.gp import EmulatorSpec, OptimizerSettings, candidate_pool
from .emulator.kernels import KERNEL_KINDS
from .emulator.means import MEAN_KINDS
from .errors import ArgumentError, ConfigError, OverdampedError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ScenarioConfig", "validate_config", "load_config", "default_horizon", "CASES"]

CASES = ("stiffness", "mass", "joint")
DEFAULT_POINTS = {"stiffness": 30, "mass": 150, "joint": 150}


def default_horizon(case: str, profile: EvolutionProfile, T0: float = 1.0) -> float:
    """Slow-time span used when the config gives none.

    One full stiffness ripple period for the stiffness case, two sawtooth
    periods when mass evolves.
    """
    if case == "stiffness":
        return 2.0 * math.pi / profile.beta_k
    return 4.0 * math.pi / profile.beta_m


def parse_kernel_name(name: str) -> tuple[str, bool]:
    """``'ard_matern52'`` or ``'ARD Matern 5/2'`` -> ``('matern52', True)``."""
    key = name.strip().lower().replace("/", "").replace("-", "_").replace(" ", "_")
    ard = key.startswith("ard_")
    if ard:
        key = key[4:]
    # compare without separators so display names and identifiers both match
    compact = {k.replace("_", ""): k for k in KERNEL_KINDS}
    compact.update({"se": "squared_exponential", "rq": "rational_quadratic", "exp": "exponential"})
    kind = compact.get(key.replace("_", ""))
    if kind is None:
        raise ArgumentError(f"unknown kernel {name!r}")
    return kind, ard


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario end to end."""

    case: str = "stiffness"
    system: NominalSystem = field(default_factory=NominalSystem)
    profile: EvolutionProfile = field(default_factory=EvolutionProfile)
    horizon: float | None = None
    n_points: int = 30
    noise_sigma: float = 0.0
    noise_scale: str | None = None
    seed: int = 0
    pool: tuple = ()
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    textbook_bic: bool = False
    out_dir: str = "runs/scenario"
    jobs: int = 1
    n_predict: int = 500
    extrapolation: float = 0.1

    @property
    def resolved_horizon(self) -> float:
        if self.horizon is not None:
            return self.horizon
        return default_horizon(self.case, self.profile, self.system.T0)

    @property
    def candidate_specs(self) -> list[EmulatorSpec]:
        return list(self.pool) if self.pool else candidate_pool()

    def with_overrides(self, **kw) -> "ScenarioConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "seed" in kw:
            kw["optimizer"] = replace(self.optimizer, seed=kw["seed"])
        if "case" in kw and kw["case"] != self.case:
            kw["profile"] = EvolutionProfile.for_case(
                kw["case"], **{k: v for k, v in asdict(self.profile).items() if k != "channels"}
            )
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "seed": self.seed,
            "n_points": self.n_points,
            "noise_sigma": self.noise_sigma,
            "noise_scale": self.noise_scale,
            "horizon": self.resolved_horizon,
            "out_dir": self.out_dir,
            "jobs": self.jobs,
            "n_predict": self.n_predict,
            "extrapolation": self.extrapolation,
            "textbook_bic": self.textbook_bic,
            "system": self.system.to_dict(),
            "profile": self.profile.to_dict(),
            "pool": [s.to_dict() for s in self.candidate_specs],
            "optimizer": self.optimizer.to_dict(),
        }


def load_config(path) -> dict:
    with open(path, "rb") as f:
        return tomllib.load(f)


def _system(raw, errors):
    raw = dict(raw or {})
    try:
        if {"c0", "k0"} & raw.keys():
            unknown = raw.keys() - {"m0", "c0", "k0"}
            if unknown:
                errors.append(f"system: unknown keys {sorted(unknown)}")
            return NominalSystem(
                m0=float(raw.get("m0", 1.0)),
                c0=float(raw.get("c0", NominalSystem.c0)),
                k0=float(raw.get("k0", NominalSystem.k0)),
            )
        unknown = raw.keys() - {"m0", "omega0", "zeta0"}
        if unknown:
            errors.append(f"system: unknown keys {sorted(unknown)}")
        return NominalSystem.from_modal(
            omega0=float(raw.get("omega0", 2 * math.pi)),
            zeta0=float(raw.get("zeta0", 0.05)),
            m0=float(raw.get("m0", 1.0)),
        )
    except (ArgumentError, TypeError, ValueError) as exc:
        errors.append(f"system: {exc}")
        return None


def _profile(case, raw, errors):
    raw = dict(raw or {})
    allowed = {f.name for f in fields(EvolutionProfile)} - {"channels"}
    unknown = raw.keys() - allowed
    if unknown:
        errors.append(f"profile: unknown keys {sorted(unknown)}")
    try:
        return EvolutionProfile.for_case(case, **{k: float(v) for k, v in raw.items() if k in allowed})
    except (ArgumentError, TypeError, ValueError) as exc:
        errors.append(f"profile: {exc}")
        return None


def _pool(raw, errors):
    if not raw:
        return ()
    means = raw.get("means", list(MEAN_KINDS))
    kernels = raw.get("kernels", [k for k in KERNEL_KINDS] + [f"ard_{k}" for k in KERNEL_KINDS])
    specs = []
    for m in means:
        if m not in MEAN_KINDS:
            errors.append(f"pool: unknown mean {m!r}")
            continue
        for k in kernels:
            try:
                kind, ard = parse_kernel_name(k)
            except ArgumentError as exc:
                errors.append(f"pool: {exc}")
                continue
            specs.append(EmulatorSpec(m, kind, ard))
    if not specs and not errors:
        errors.append("pool: no candidates")
    return tuple(dict.fromkeys(specs))


def _optimizer(raw, seed, errors):
    raw = dict(raw or {})
    allowed = {f.name for f in fields(OptimizerSettings)} - {"seed"}
    unknown = raw.keys() - allowed
    if unknown:
        errors.append(f"optimizer: unknown keys {sorted(unknown)}")
    kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in raw.items() if k in allowed}
    settings = OptimizerSettings(seed=seed, **kw)
    if settings.n_starts < 1:
        errors.append("optimizer: n_starts must be >= 1")
    if not settings.gtol > 0:
        errors.append("optimizer: gtol must be positive")
    return settings


def validate_config(source) -> ScenarioConfig:
    """Resolve a scenario config from a TOML path or a dict.

    Every violation is collected; if any are found a :class:`ConfigError`
    listing all of them is raised.
    """
    raw = dict(source) if isinstance(source, dict) else load_config(Path(source))
    errors: list[str] = []
    top = {
        "case", "seed", "n_points", "noise_sigma", "noise_scale", "horizon", "out_dir", "jobs",
        "n_predict", "extrapolation", "textbook_bic", "system", "profile", "pool", "optimizer",
    }
    unknown = raw.keys() - top
    if unknown:
        errors.append(f"unknown keys {sorted(unknown)}")

    case = raw.get("case", "stiffness")
    if case not in CASES:
        errors.append(f"case must be one of {CASES}, got {case!r}")
        case = "stiffness"

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append(f"seed must be a non-negative integer, got {seed!r}")
        seed = 0

    n_points = raw.get("n_points", DEFAULT_POINTS[case])
    if not isinstance(n_points, int) or isinstance(n_points, bool) or n_points < 2:
        errors.append(f"n_points must be an integer >= 2 for the slow-time grid, got {n_points!r}")

    sigma = raw.get("noise_sigma", 0.0)
    if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or not sigma >= 0:
        errors.append(f"noise_sigma must be >= 0, got {sigma!r}")

    noise_scale = raw.get("noise_scale")
    if noise_scale not in (None, "omega0", "nominal"):
        errors.append(f"noise_scale must be 'omega0' or 'nominal', got {noise_scale!r}")

    horizon = raw.get("horizon")
    if horizon is not None and (not isinstance(horizon, (int, float)) or not horizon > 0):
        errors.append(f"horizon must be positive, got {horizon!r}")

    jobs = raw.get("jobs", 1)
    if not isinstance(jobs, int) or jobs < 1:
        errors.append(f"jobs must be a positive integer, got {jobs!r}")

    n_predict = raw.get("n_predict", 500)
    if not isinstance(n_predict, int) or n_predict < 500:
        errors.append(f"n_predict must be an integer >= 500, got {n_predict!r}")

    extrapolation = raw.get("extrapolation", 0.1)
    if not isinstance(extrapolation, (int, float)) or extrapolation < 0:
        errors.append(f"extrapolation must be >= 0, got {extrapolation!r}")

    system = _system(raw.get("system"), errors)
    profile = _profile(case, raw.get("profile"), errors)
    pool = _pool(raw.get("pool"), errors)
    optimizer = _optimizer(raw.get("optimizer"), seed if isinstance(seed, int) else 0, errors)

    if system is not None and profile is not None and not errors:
        # the evolved system must stay underdamped over the whole horizon
        h = horizon if horizon is not None else default_horizon(case, profile, system.T0)
        check = np.linspace(0.0, h * (1.0 + extrapolation), 2001)
        try:
            eigenvalue(check, profile, system)
        except OverdampedError as exc:
            errors.append(f"profile leaves the underdamped region within the horizon: {exc}")

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        case=case,
        system=system,
        profile=profile,
        horizon=None if horizon is None else float(horizon),
        n_points=n_points,
        noise_sigma=float(sigma),
        noise_scale=noise_scale,
        seed=seed,
        pool=pool,
        optimizer=optimizer,
        textbook_bic=bool(raw.get("textbook_bic", False)),
        out_dir=str(raw.get("out_dir", f"runs/{case}")),
        jobs=jobs,
        n_predict=n_predict,
        extrapolation=float(extrapolation),
    )
