"""
Stiffness twin at three noise levels
====================================

The full pipeline (simulate, invert, select, predict) for a stiffness-only
drift, run with clean data and at three measurement noise levels.
Artifacts land in ``runs/demo_stiffness``.
"""

# %%
from gptwin.config import validate_config
from gptwin.pipeline import run_matrix, run_scenario

base = validate_config({"case": "stiffness", "n_points": 30, "seed": 0})

# %%
# Clean data
# ----------
art = run_scenario(base, "runs/demo_stiffness/clean")
m = art.metrics["channels"]["stiffness"]
print(f"clean: {art.metrics['winner']}, RMSE {m['rmse']:.2e}")

# %%
# Noisy data
# ----------
rows = run_matrix(base, [30], [0.005, 0.015, 0.025], out_dir="runs/demo_stiffness/noisy")
for r in rows:
    m = r["channels"]["stiffness"]
    print(f"sigma {r['noise_sigma']}: {r['winner']}, RMSE {m['rmse']:.4f}, coverage {m['coverage95']:.2f}")
