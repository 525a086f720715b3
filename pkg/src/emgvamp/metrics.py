"""Error metrics for estimates that are identifiable only up to a global phase."""

from __future__ import annotations

import numpy as np

__all__ = ["phase_corrected_nmse"]


def phase_corrected_nmse(xhat, x_true):
    """Normalized squared error minimized over a global phase rotation.

    Computes ``min_{|c|=1} ||c xhat - x_true||^2 / ||x_true||^2``; the
    minimizer is ``c = <xhat, x_true> / |<xhat, x_true>|`` with the
    convention ``c = 1`` when the inner product vanishes.
    """
    xhat = np.asarray(xhat)
    x_true = np.asarray(x_true)
    if xhat.shape != x_true.shape:
        raise ValueError("estimate and truth must have equal length")
    energy = np.linalg.norm(x_true) ** 2
    if energy == 0:
        raise ValueError("x_true must be nonzero")
    ip = np.vdot(xhat, x_true)
    c = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(c * xhat - x_true) ** 2 / energy)
