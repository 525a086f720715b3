"""
Learning the noise variance during phase retrieval
==================================================

A complex Gaussian signal is observed through magnitude-only measurements
with unknown noise variance.  The outer loop alternates message-passing
inference with a closed-form re-estimate of the variance; starting from
estimates 100x too small or 10x too large, the trajectory settles at the
truth within a handful of iterations and the reconstruction error matches
the run that knew the variance all along.
"""

import dataclasses

import numpy as np

from emgvamp import EmConfig, GvampConfig, ThetaEstimate, em_gvamp
from emgvamp.harness import ExperimentConfig, build_instance

cfg = ExperimentConfig(m=512, n=64)
sigma = cfg.sigma_actual(25.0)  # signal-to-noise preserved relative to full scale
model, x, z, y = build_instance(cfg, sigma, seed=0)
print(f"instance: {cfg.m}x{cfg.n}, true noise variance {sigma}")

for init_factor in (0.01, 1.0, 10.0):
    theta0 = ThetaEstimate(
        model.prior,
        dataclasses.replace(model.channel, noise_variance=init_factor * sigma),
    )
    result = em_gvamp(
        model, y, theta0,
        EmConfig(max_em_iters=20, em_tol=1e-3),
        GvampConfig(max_iters=100, tol=1e-6),
        x_true=x,
    )
    traj = " -> ".join(f"{h.nu_w:.3g}" for h in result.history)
    print()
    print(f"init {init_factor:g} x truth:")
    print(f"  variance trajectory: {traj}")
    print(f"  final error {result.history[-1].nmse:.3e}, status {result.status.value}")
