"""
Mass twin and the sampling rate
===============================

A sawtooth mass drift has sharp jumps. With noisy readings the emulator
needs enough samples per tooth to find the edges, so accuracy improves
markedly as the point count grows.
"""

# %%
from gptwin.config import validate_config
from gptwin.pipeline import run_matrix

base = validate_config({"case": "mass", "noise_sigma": 0.025, "seed": 0})
rows = run_matrix(base, [50, 100, 200], [0.025], out_dir="runs/demo_mass")
for r in rows:
    m = r["channels"]["mass"]
    print(f"n = {r['n_points']:>3}: {r['winner']:<36} RMSE {m['rmse']:.4f}, coverage {m['coverage95']:.2f}")
