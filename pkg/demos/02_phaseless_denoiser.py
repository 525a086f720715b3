"""
Posterior denoising under magnitude-only observations
=====================================================

Given a magnitude observation y = |z + w| and a circular-Gaussian pseudo
prior on z, the posterior mean keeps the pseudo-prior phase exactly while
the radial part is pulled between the pseudo-prior modulus and the
observation.  The posterior variance shrinks as either source of
information sharpens.
"""

import numpy as np

from emgvamp import PhaselessAwgnChannel

channel = PhaselessAwgnChannel(noise_variance=0.25)

y = np.array([2.0])
p = np.array([1.5 + 0.5j])

print(f"observation y = {y[0]}, pseudo-prior mean p = {p[0]} (|p| = {abs(p[0]):.4f})")
print()
print(f"{'tau':>8} {'E[z]':>24} {'|E[z]|':>9} {'avg var':>10}")
for tau in (0.1, 1.0, 4.0, 25.0, 400.0):
    res = channel.denoise(y, p, tau)
    mean = res.mean[0]
    print(f"{tau:8.1f} {mean:24.5f} {abs(mean):9.4f} {res.avg_variance:10.6f}")

print()
print("phase is inherited from the pseudo prior:")
for tau in (0.1, 4.0, 400.0):
    res = channel.denoise(y, p, tau)
    print(f"  tau {tau:6.1f}: arg E[z] = {np.angle(res.mean[0]):+.10f}  arg p = {np.angle(p[0]):+.10f}")

print()
print("with p = 0 the posterior is circularly symmetric and the mean vanishes:")
res = channel.denoise(y, np.array([0.0j]), 4.0)
print(f"  E[z] = {res.mean[0]},  avg var = {res.avg_variance:.4f}")
