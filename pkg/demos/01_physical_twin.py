"""
The physical twin
=================

A single-degree-of-freedom oscillator whose stiffness and mass drift on a
slow timescale. This script evaluates the drift profiles and the damped
eigenvalue they produce, then samples noisy frequency measurements.
"""

# %%
# The nominal system and the default drift profile
# ------------------------------------------------
# The defaults give a unit natural period and 5% damping.
import numpy as np

from gptwin import EvolutionProfile, NominalSystem, eigenvalue, sample_measurements, slow_time_grid

system = NominalSystem()
profile = EvolutionProfile()
print(f"omega0 = {system.omega0:.4f} rad/s, zeta0 = {system.zeta0:.3f}, T0 = {system.T0:.3f}")
print(profile)

# %%
# Stiffness decays with a slow ripple; mass follows a sawtooth
# -------------------------------------------------------------
t = np.linspace(0.0, 2 * np.pi / profile.beta_k, 9)
dk, dm = profile.deltas(t)
lam = eigenvalue(t, profile, system) / system.omega0
print(f"\n{'t_s/T0':>8} {'dk':>9} {'dm':>9} {'Re lam/w0':>10} {'Im lam/w0':>10}")
for row in zip(t / system.T0, dk, dm, lam.real, lam.imag):
    print("{:8.1f} {:9.4f} {:9.4f} {:10.5f} {:10.5f}".format(*row))

# %%
# Sensor readings
# ---------------
# Thirty damped-frequency readings over one ripple period, with additive
# Gaussian noise of standard deviation 0.015 (relative to omega0).
stiff = EvolutionProfile.for_case("stiffness")
grid = slow_time_grid(30, 2 * np.pi / stiff.beta_k)
series = sample_measurements(grid, stiff, system, noise_sigma=0.015, seed=0)
print("\nfirst five readings:", np.round(series.values[:5], 4))
