"""
The objective along one phase is a sinusoid
===========================================

Fix every phase but one and sweep the remaining phase around the circle.
The sum path gain traces out a single cosine, so its maximizer along that
coordinate is available in closed form.  That is the whole idea behind the
element-wise update used by DSM.
"""

import numpy as np

from irsdsm import SystemConfig, gen_channel_set
from irsdsm.spgm import TWO_PI, build_cache, coordinate_argmax, sinusoid_params, spgm_objective

rng = np.random.default_rng(7)
channels = gen_channel_set(SystemConfig(K=4, L=4, N=8), rng)
theta = rng.uniform(0, TWO_PI, 8)

###############################################################################
# Sweep element 3 and compare against the fitted cosine.
n = 3
amplitude, phase, offset = sinusoid_params(channels, theta, n)
grid = np.linspace(0, TWO_PI, 13)
for value in grid:
    probe = theta.copy()
    probe[n] = value
    psi = spgm_objective(channels, probe)
    model = amplitude * np.cos(value + phase) + offset
    print(f"theta_{n} = {value:5.2f}   psi = {psi:9.4f}   cosine fit = {model:9.4f}")

###############################################################################
# The peak sits at minus the fitted phase, and the DSM update lands there.
best = coordinate_argmax(build_cache(channels), theta, n)
print(f"\npeak from the fit : {(-phase) % TWO_PI:.6f}")
print(f"coordinate update : {best:.6f}")
