"""
Choosing a model with BIC
=========================

Fit all thirty mean/kernel candidates and rank them by
``k ln n - log L``. Candidates with more hyperparameters must earn their
keep through a better likelihood.
"""

# %%
import numpy as np

from gptwin import EvolutionProfile, NominalSystem, invert_series, sample_measurements, slow_time_grid
from gptwin.selection import select_model

system = NominalSystem()
profile = EvolutionProfile.for_case("stiffness")
grid = slow_time_grid(30, 2 * np.pi / profile.beta_k)
est = invert_series(sample_measurements(grid, profile, system, noise_sigma=0.005, seed=2))

report = select_model(grid, est.delta_k_hat)
print(report.to_table())
print("winner:", report.winner.spec.name)

# %%
# In one input dimension an ARD kernel is its isotropic twin, so each ARD row
# ties with its partner and the tie goes to the earlier candidate.
