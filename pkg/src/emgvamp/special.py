"""Stable special functions for Rician amplitude and circular-phase statistics.

Everything here is built on the exponentially scaled modified Bessel
functions ``e^{-x} I0(x)`` and ``e^{-x} I1(x)``.  The unscaled I0/I1
overflow double precision once x exceeds ~713, while the concentration
arguments arising in phaseless measurement channels grow like
``2*y*|z|/nu_w`` and routinely reach 1e6 and beyond.  The scaled forms stay
in (0, 1], and every downstream formula is arranged so that the dropped
exponential factors cancel exactly.
"""

from __future__ import annotations

import numpy as np
from scipy import special as sp

__all__ = [
    "bessel_i0_scaled",
    "bessel_i1_scaled",
    "bessel_ratio_r0",
    "laguerre_half",
    "rician_moments",
    "von_mises_pdf",
]

# Above this concentration the Bessel ratio is returned from its tail
# expansion; the neglected remainder is o(kappa^-3).
_R0_TAIL_CUTOVER = 1e8


def _validated(x, name, *, nonneg=False, nonpos=False):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if nonneg and np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    if nonpos and np.any(arr > 0):
        raise ValueError(f"{name} must be nonpositive")
    return arr


def _match(result, x):
    # scalar in, scalar out
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(result)
    return result


def bessel_i0_scaled(x):
    """Exponentially scaled modified Bessel function ``e^{-x} I0(x)``.

    Parameters
    ----------
    x : float or ndarray
        Nonnegative, finite argument.

    Returns
    -------
    float or ndarray
        ``exp(-x) * I0(x)``, in (0, 1].

    Raises
    ------
    ValueError
        If any entry of ``x`` is negative or non-finite.
    """
    arr = _validated(x, "x", nonneg=True)
    return _match(sp.i0e(arr), x)


def bessel_i1_scaled(x):
    """Exponentially scaled modified Bessel function ``e^{-x} I1(x)``.

    Same domain and conventions as :func:`bessel_i0_scaled`; the result is
    in [0, 1) and vanishes at ``x = 0``.
    """
    arr = _validated(x, "x", nonneg=True)
    return _match(sp.i1e(arr), x)


def bessel_ratio_r0(kappa):
    """Modified Bessel ratio ``R0(kappa) = I1(kappa) / I0(kappa)``.

    Computed from the scaled forms, whose exponential factors cancel, so
    the ratio is well defined for arbitrarily large concentration.  For
    ``kappa > 1e8`` the three-term tail expansion
    ``1 - 1/(2k) - 1/(8k^2) - 1/(8k^3)`` is returned directly.

    The ratio is the mean resultant length of a von Mises distribution
    with concentration ``kappa``; it increases from 0 towards 1.
    """
    arr = _validated(kappa, "kappa", nonneg=True)
    arr1 = np.atleast_1d(arr)
    out = sp.i1e(arr1) / sp.i0e(arr1)
    big = arr1 > _R0_TAIL_CUTOVER
    if np.any(big):
        k = arr1[big]
        out[big] = 1.0 - 1.0 / (2.0 * k) - 1.0 / (8.0 * k**2) - 1.0 / (8.0 * k**3)
    return _match(out.reshape(np.shape(arr)), kappa)


def laguerre_half(x):
    """Laguerre function ``L_{1/2}(x)`` for nonpositive argument.

    Evaluates ``exp(x/2) * [(1-x) I0(-x/2) - x I1(-x/2)]`` with the
    exponential factor absorbed into the scaled Bessels:

        ``L_{1/2}(x) = (1-x) i0e(-x/2) - x i1e(-x/2)``,   x <= 0.

    The absorption is exact, so the result stays finite for arbitrarily
    negative ``x`` (it grows like ``sqrt(-x)``).
    """
    arr = _validated(x, "x", nonpos=True)
    t = -0.5 * arr
    return _match((1.0 - arr) * sp.i0e(t) - arr * sp.i1e(t), x)


def rician_moments(zhat_abs, precision):
    """First two moments of a Rician amplitude.

    For ``z`` circular-Gaussian with mean modulus ``zhat_abs`` and
    precision ``precision`` (i.e. ``E|z - zhat|^2 = 1/precision``), the
    modulus ``rho = |z|`` is Rician with

        ``E[rho]   = sqrt(pi / (4 precision)) * L_{1/2}(-precision * zhat_abs^2)``
        ``E[rho^2] = 1/precision + zhat_abs^2``

    Parameters
    ----------
    zhat_abs : float or ndarray
        Nonnegative mean modulus.
    precision : float
        Positive precision of the underlying circular Gaussian.

    Returns
    -------
    (mean, second_moment) : tuple of float or ndarray
    """
    a = _validated(zhat_abs, "zhat_abs", nonneg=True)
    zeta = float(precision)
    if not np.isfinite(zeta) or zeta <= 0:
        raise ValueError("precision must be positive and finite")
    mean = np.sqrt(np.pi / (4.0 * zeta)) * laguerre_half(-zeta * a**2)
    second = 1.0 / zeta + a**2
    return _match(mean, zhat_abs), _match(second, zhat_abs)


def von_mises_pdf(theta, phi, kappa):
    """Normalized von Mises density ``exp(kappa cos(theta-phi)) / (2 pi I0(kappa))``.

    Evaluated in the overflow-safe form
    ``exp(kappa (cos(theta-phi) - 1)) / (2 pi i0e(kappa))``, whose exponent
    is never positive.  ``kappa = 0`` gives the uniform density on the
    circle.
    """
    th = _validated(theta, "theta")
    ph = _validated(phi, "phi")
    k = _validated(kappa, "kappa", nonneg=True)
    out = np.exp(k * (np.cos(th - ph) - 1.0)) / (2.0 * np.pi * sp.i0e(k))
    if np.isscalar(theta) and np.isscalar(phi) and np.isscalar(kappa):
        return float(out)
    return out
