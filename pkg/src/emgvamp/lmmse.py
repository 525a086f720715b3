"""Joint-Gaussian estimation of the two blocks under the exact linear constraint.

Given pseudo-priors ``N(x; r2, I/gamma2)`` and ``N(z; p2, I/tau2)`` and the
hard constraint ``z = A x``, the posterior is Gaussian and the mean solves

    ``x2 = argmin_x  gamma2 ||x - r2||^2 + tau2 ||A x - p2||^2``.

With the operator's cached SVD ``A = U diag(s) V^H`` the solve is two
matvecs per call.  Directions outside the row space of ``A`` feel only the
``gamma2`` term and stay at ``r2``.

The returned sensitivities are the average posterior-variance ratios of
the two blocks:

    ``alpha_x = (gamma2/N) tr[(gamma2 I + tau2 A^H A)^{-1}]``
    ``alpha_z = (tau2/M)  tr[A (gamma2 I + tau2 A^H A)^{-1} A^H]``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LmmseResult", "lmmse_solve"]


@dataclass(frozen=True)
class LmmseResult:
    x2: np.ndarray
    z2: np.ndarray
    alpha_x: float
    alpha_z: float


def lmmse_solve(op, r2, gamma2, p2, tau2):
    """Solve the constrained joint-Gaussian problem through the cached SVD."""
    if not (np.isfinite(gamma2) and gamma2 > 0):
        raise ValueError("gamma2 must be positive and finite")
    if not (np.isfinite(tau2) and tau2 > 0):
        raise ValueError("tau2 must be positive and finite")
    m, n = op.shape
    r2 = np.asarray(r2)
    p2 = np.asarray(p2)
    if r2.shape != (n,) or p2.shape != (m,):
        raise ValueError("input dimensions do not match the operator")

    u, s, vh = op.svd
    k = s.size
    t = vh @ r2
    uy = u.conj().T @ p2
    denom = gamma2 + tau2 * s**2
    coeffs = (gamma2 * t + tau2 * s * uy) / denom

    x2 = vh.conj().T @ coeffs
    if k < n:
        # row-space complement: gamma2-only shrinkage keeps it at r2
        x2 = x2 + (r2 - vh.conj().T @ t)
    z2 = u @ (s * coeffs)

    alpha_x = (float(np.sum(gamma2 / denom)) + (n - k)) / n
    alpha_z = float(np.sum(tau2 * s**2 / denom)) / m
    return LmmseResult(x2, z2, alpha_x, alpha_z)
