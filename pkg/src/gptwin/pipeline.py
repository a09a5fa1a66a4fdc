"""End-to-end scenario runs: simulate, invert, select, predict, report."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._format import fmt, write_csv
from .config import ScenarioConfig
from .dynamics import (
    COMPLEX_EIGENVALUE,
    DAMPED_FREQUENCY,
    MeasurementSeries,
    sample_measurements,
    slow_time_grid,
)
from .errors import GPTwinError, PipelineError
from .inversion import DeltaEstimateSeries, invert_series
from .selection import ModelSelectionReport, select_model

__all__ = [
    "RunArtifacts",
    "simulate",
    "held_out_seed",
    "prediction_grid",
    "run_scenario",
    "run_matrix",
    "emit_report",
]

FAILED_MARKER = "FAILED"


@dataclass
class RunArtifacts:
    out_dir: Path
    files: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    failed_stage: str | None = None
    selection: ModelSelectionReport | None = None


def _dump_json(obj, path) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def held_out_seed(seed: int) -> int:
    """Independent, reproducible seed for held-out validation noise."""
    return int(np.random.SeedSequence(seed).spawn(1)[0].generate_state(1)[0])


def simulate(cfg: ScenarioConfig, grid=None, seed=None) -> MeasurementSeries:
    grid = slow_time_grid(cfg.n_points, cfg.resolved_horizon) if grid is None else grid
    kind = COMPLEX_EIGENVALUE if cfg.case == "joint" else DAMPED_FREQUENCY
    return sample_measurements(
        grid, cfg.profile, cfg.system, kind, cfg.noise_sigma,
        cfg.seed if seed is None else seed, cfg.noise_scale,
    )


def prediction_grid(cfg: ScenarioConfig):
    """Dense grid over the horizon plus the extrapolation margin.

    Returns ``(t, extrapolated)``; ``n_predict`` points cover the horizon.
    """
    h = cfg.resolved_horizon
    t_in = np.linspace(0.0, h, cfg.n_predict)
    step = t_in[1] - t_in[0]
    n_out = int(round(cfg.extrapolation * h / step))
    t_out = h + step * np.arange(1, n_out + 1)
    t = np.concatenate([t_in, t_out])
    return t, t > h


def _channel_truth(cfg, t):
    dk, dm = cfg.profile.deltas(t)
    return {"stiffness": dk, "mass": dm}


def _targets(deltas: DeltaEstimateSeries, case: str):
    tg = deltas.targets()
    if case == "joint":
        return {"mass": tg["mass"], "stiffness": tg["stiffness"]}
    return {case: tg[case]}


def _coverage(cfg, emulators, case):
    """Share of held-out noisy estimates inside the 95% observation band."""
    if cfg.noise_sigma == 0:
        return {ch: None for ch in emulators}
    grid = slow_time_grid(cfg.n_points, cfg.resolved_horizon)
    mid = 0.5 * (grid[:-1] + grid[1:])
    held = invert_series(simulate(cfg, grid=mid, seed=held_out_seed(cfg.seed)), cfg.system, case)
    obs = _targets(held, case)
    out = {}
    for ch, em in emulators.items():
        _, lo, hi = em.band(mid, observation=True)
        out[ch] = float(np.mean((obs[ch] >= lo) & (obs[ch] <= hi)))
    return out


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> RunArtifacts:
    """Run the whole pipeline and write its artifacts.

    On a stage failure a ``FAILED`` marker naming the stage is written next
    to whatever artifacts already exist, and :class:`PipelineError` is
    raised.
    """
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / FAILED_MARKER
    if marker.exists():
        marker.unlink()
    art = RunArtifacts(out)
    _dump_json(cfg.to_dict(), out / "config.json")
    art.files["config"] = "config.json"
    stage = "simulate"
    try:
        series = simulate(cfg)
        series.to_csv(out / "measurements.csv")
        series.to_json(out / "measurements.json")
        art.files["measurements"] = "measurements.csv"
        art.files["measurements_json"] = "measurements.json"

        stage = "invert"
        deltas = invert_series(series, cfg.system, cfg.case, source="measurements.json")
        deltas.to_csv(out / "deltas.csv")
        deltas.to_json(out / "deltas.json")
        art.files["deltas"] = "deltas.csv"
        art.files["deltas_json"] = "deltas.json"

        stage = "select"
        targets = _targets(deltas, cfg.case)
        report = select_model(
            series.slow_times, targets, cfg.candidate_specs, cfg.optimizer,
            cfg.textbook_bic, cfg.jobs,
        )
        art.selection = report
        report.to_json(out / "selection.json", include_timing=False)
        (out / "selection.txt").write_text(report.to_table())
        art.files["selection"] = "selection.json"
        art.files["selection_table"] = "selection.txt"

        stage = "fit"
        emulators = report.emulators
        for ch, em in emulators.items():
            em.to_json(out / f"emulator_{ch}.json")
            art.files[f"emulator_{ch}"] = f"emulator_{ch}.json"

        stage = "predict"
        t, extrap = prediction_grid(cfg)
        truth = _channel_truth(cfg, t)
        metrics = {"case": cfg.case, "winner": report.winner.spec.name, "channels": {}}
        coverage = _coverage(cfg, emulators, cfg.case)
        for ch, em in emulators.items():
            mu, lo, hi = em.band(t, observation=False)
            _, olo, ohi = em.band(t, observation=True)
            rows = zip(t / cfg.system.T0, truth[ch], mu, lo, hi, olo, ohi, extrap)
            write_csv(
                out / f"predictions_{ch}.csv",
                ["t_s_over_T0", "true_delta", "posterior_mean", "lower95", "upper95",
                 "obs_lower95", "obs_upper95", "extrapolated"],
                rows,
            )
            art.files[f"predictions_{ch}"] = f"predictions_{ch}.csv"
            inside = ~extrap
            err = mu[inside] - truth[ch][inside]
            metrics["channels"][ch] = {
                "rmse": float(np.sqrt(np.mean(err**2))),
                "rmse_extrapolated": float(np.sqrt(np.mean((mu[extrap] - truth[ch][extrap]) ** 2)))
                if extrap.any() else None,
                "coverage95": coverage[ch],
                "truth_in_latent_band": float(np.mean((truth[ch][inside] >= lo[inside]) & (truth[ch][inside] <= hi[inside]))),
                "n_flagged": int(deltas.flagged.sum()),
            }
        art.metrics = metrics
        _dump_json(metrics, out / "metrics.json")
        art.files["metrics"] = "metrics.json"
    except (GPTwinError, np.linalg.LinAlgError, ValueError, ArithmeticError) as exc:
        art.failed_stage = stage
        marker.write_text(f"stage: {stage}\nerror: {type(exc).__name__}: {exc}\n")
        art.files["failed"] = FAILED_MARKER
        emit_report(out)
        raise PipelineError(stage, exc) from exc
    emit_report(out)
    art.files["report"] = "report.md"
    return art


def _matrix_cell(args):
    cfg, cell_dir = args
    row = {"case": cfg.case, "n_points": cfg.n_points, "noise_sigma": cfg.noise_sigma, "seed": cfg.seed}
    try:
        art = run_scenario(cfg, cell_dir)
    except PipelineError as exc:
        row.update(status="FAILED", stage=exc.stage, winner=None, channels={})
        return row
    row.update(status="ok", stage=None, winner=art.metrics["winner"], channels=art.metrics["channels"])
    return row


def run_matrix(base: ScenarioConfig, points, sigmas, seeds=None, out_dir=None, jobs: int = 1):
    """Run the cross product of point counts, noise levels and seeds.

    Every cell gets its own directory under ``out_dir``; failures are
    recorded and the sweep continues. Writes ``summary.csv`` and returns
    its rows as dicts.
    """
    points, sigmas = list(points), list(sigmas)
    seeds = [base.seed] if seeds is None else list(seeds)
    if not points or not sigmas or not seeds:
        raise GPTwinError("matrix axes must be nonempty")
    root = Path(out_dir or base.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    cells = []
    for n in points:
        for s in sigmas:
            for seed in seeds:
                cfg = base.with_overrides(n_points=int(n), noise_sigma=float(s), seed=int(seed), jobs=1)
                cells.append((cfg, root / f"n{n}_sigma{fmt(float(s))}_seed{seed}"))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_matrix_cell, cells))
    else:
        rows = [_matrix_cell(c) for c in cells]

    channels = ["mass", "stiffness"] if base.case == "joint" else [base.case]
    header = ["case", "n_points", "noise_sigma", "seed", "status", "stage", "winner"]
    for ch in channels:
        header += [f"rmse_{ch}", f"coverage95_{ch}"]
    table = []
    for r in rows:
        line = [r["case"], r["n_points"], r["noise_sigma"], r["seed"], r["status"], r["stage"], r["winner"]]
        for ch in channels:
            m = r["channels"].get(ch)
            cov = None if m is None else m["coverage95"]
            line += [None if m is None else m["rmse"], "n/a" if (m is not None and cov is None) else cov]
        table.append(line)
    write_csv(root / "summary.csv", header, table)
    return rows


def _fmt_num(x):
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def emit_report(run_dir) -> str:
    """Write ``report.md`` summarizing a run directory and return its text."""
    run_dir = Path(run_dir)
    lines = ["# Scenario report", ""]
    marker = run_dir / FAILED_MARKER
    if marker.exists():
        lines += ["**Status: FAILED**", "", "```", marker.read_text().rstrip(), "```", ""]
    else:
        lines += ["**Status: ok**", ""]

    cfg_path = run_dir / "config.json"
    if cfg_path.exists():
        cfg = json.loads(cfg_path.read_text())
        lines += ["## Configuration", ""]
        for key in ("case", "seed", "n_points", "noise_sigma", "noise_scale", "horizon"):
            lines.append(f"- {key}: {_fmt_num(cfg.get(key))}")
        sysd = cfg.get("system", {})
        lines.append(f"- zeta0: {_fmt_num(sysd.get('zeta0'))}, omega0: {_fmt_num(sysd.get('omega0'))}")
        prof = cfg.get("profile", {})
        lines.append(
            "- profile: " + ", ".join(f"{k}={_fmt_num(v)}" for k, v in prof.items() if k != "channels")
            + f" (channels: {', '.join(prof.get('channels', []))})"
        )
        lines.append(f"- candidates: {len(cfg.get('pool', []))}")
        lines.append("")

    sel_path = run_dir / "selection.json"
    if sel_path.exists():
        sel = json.loads(sel_path.read_text())
        win = sel["records"][sel["winner_index"]]
        lines += ["## Selected model", "", f"- winner: {sel['winner']} (BIC {_fmt_num(win['bic'])}, k = {win['k_m']}, n = {win['n']})"]
        for ch, fitd in zip(sel["channels"], win["fits"]):
            kern = fitd["kernel"]
            ell = ", ".join(_fmt_num(v) for v in kern["ell"])
            params = f"sf2={_fmt_num(kern['sf2'])}, ell=[{ell}]"
            if kern.get("alpha") is not None:
                params += f", alpha={_fmt_num(kern['alpha'])}"
            lines.append(
                f"- {ch}: beta=[{', '.join(_fmt_num(b) for b in fitd['beta'])}], {params}, "
                f"noise variance={_fmt_num(fitd['noise_variance'])}"
            )
        lines.append("")

    met_path = run_dir / "metrics.json"
    if met_path.exists():
        met = json.loads(met_path.read_text())
        lines += ["## Accuracy", "", "| channel | RMSE | 95% coverage | truth in latent band |", "|---|---|---|---|"]
        for ch, m in met["channels"].items():
            lines.append(
                f"| {ch} | {_fmt_num(m['rmse'])} | {_fmt_num(m['coverage95'])} | {_fmt_num(m['truth_in_latent_band'])} |"
            )
        lines.append("")

    lines += ["## Files", ""]
    for p in sorted(run_dir.iterdir()):
        if p.is_file() and p.name != "report.md":
            lines.append(f"- [{p.name}]({p.name})")
    text = "\n".join(lines) + "\n"
    (run_dir / "report.md").write_text(text)
    return text
