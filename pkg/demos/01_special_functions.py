"""
Scaled Bessel functions and Rician amplitude moments
====================================================

The phaseless measurement channel concentrates the hidden phase around
the pseudo-prior phase; the concentration parameter grows with the
signal-to-noise ratio and quickly overflows the raw Bessel functions.
Everything in the library therefore runs on the exponentially scaled
forms.  This script shows the Bessel ratio saturating towards one and the
Rician amplitude mean interpolating between the Rayleigh value and the
true modulus.
"""

import numpy as np

from emgvamp import bessel_ratio_r0, laguerre_half, rician_moments

# the mean resultant length of a von Mises phase posterior
for kappa in (0.0, 0.5, 5.0, 50.0, 5e3, 5e7, 5e11):
    print(f"concentration {kappa:10.3g}  ->  mean resultant length {bessel_ratio_r0(kappa):.12f}")

print()

# Rician amplitude mean: Rayleigh limit at zero modulus, concentration limit
# at high precision
zeta = 4.0
print(f"belief precision {zeta}; Rayleigh mean = {np.sqrt(np.pi / (4 * zeta)):.6f}")
for modulus in (0.0, 0.5, 1.0, 2.0, 8.0):
    mean, second = rician_moments(modulus, zeta)
    print(f"modulus {modulus:4.1f}:  E[rho] = {mean:.6f}   E[rho^2] = {second:.6f}")

print()

# the scaled evaluation stays finite arbitrarily deep into the tail
for x in (-1.0, -100.0, -1e4, -1e8):
    print(f"L_1/2({x:10.3g}) = {laguerre_half(x):.6e}")
