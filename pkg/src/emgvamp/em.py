"""Outer parameter-learning loop around the moment-matching engine.

Each outer iteration runs the engine at the current parameter estimate
(warm-started from the previous state), then re-estimates the parameters
from the resulting Gaussian belief ``N(x; xhat, I/eta) N(z; zhat, I/zeta)``
by maximizing the expected complete-data log-likelihood componentwise.

For the additive-Gaussian and Gaussian-prior factors the maximizers are
closed form.  For the phaseless channel the noise-variance stationarity
condition is implicit (the Bessel-ratio term depends on the new variance),
and is solved by a damped fixed-point iteration whose inner integrals use
the same radial quadrature as the channel denoiser; a high-SNR shortcut
based on Rician moments is available as an alternative update.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sp

from .engine import GvampConfig, GvampStatus, gvamp_init, gvamp_run
from .metrics import phase_corrected_nmse
from .model import (
    AwgnChannel,
    BernoulliGaussianPrior,
    CircularGaussianPrior,
    GaussianPrior,
    PhaselessAwgnChannel,
    ThetaEstimate,
)
from .special import bessel_ratio_r0, rician_moments

__all__ = [
    "EmConfig",
    "EmStatus",
    "EmIterRecord",
    "EmResult",
    "PhaselessVarianceUpdate",
    "m_step_awgn_variance",
    "m_step_phaseless_variance_exact",
    "m_step_phaseless_variance_highsnr",
    "m_step_prior_gaussian",
    "em_gvamp",
]


class EmStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"
    STALLED = "stalled"


@dataclass(frozen=True)
class EmConfig:
    max_em_iters: int = 25
    em_tol: float = 1e-4
    variance_update: str = "exact"  # "exact" or "high_snr"
    inner_max_iters: int = 25
    inner_tol: float = 1e-6
    inner_damping: float = 0.5
    nu_floor: float = 1e-8
    learn_noise: bool = True
    learn_prior: bool = False

    def __post_init__(self):
        if self.variance_update not in ("exact", "high_snr"):
            raise ValueError("variance_update must be 'exact' or 'high_snr'")
        if not self.nu_floor > 0:
            raise ValueError("nu_floor must be positive")


@dataclass(frozen=True)
class EmIterRecord:
    em_iter: int
    nu_w: float
    nmse: float
    gvamp_sweeps: int
    gvamp_status: GvampStatus


@dataclass(frozen=True)
class EmResult:
    xhat: np.ndarray
    zhat: np.ndarray
    theta: ThetaEstimate
    history: list
    status: EmStatus


class PhaselessVarianceUpdate(NamedTuple):
    value: float
    inner_converged: bool


def m_step_awgn_variance(y, zhat, zeta, floor=1e-8):
    """Noise-variance maximizer for the additive-Gaussian factor.

    ``E|y - z|^2`` under ``z ~ N(zhat, 1/zeta)`` is ``|y - zhat|^2 + 1/zeta``
    componentwise, and the expected log-likelihood is maximized by its
    average.
    """
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    y = np.asarray(y)
    zhat = np.asarray(zhat)
    return max(float(np.mean(np.abs(y - zhat) ** 2) + 1.0 / zeta), floor)


def m_step_prior_gaussian(xhat, eta, floor=1e-8):
    """Mean/variance maximizers for a Gaussian prior factor."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    xhat = np.asarray(xhat)
    mean = xhat.mean()
    variance = max(float(np.mean(np.abs(xhat - mean) ** 2) + 1.0 / eta), floor)
    return mean, variance


def m_step_phaseless_variance_highsnr(y, zhat, zeta, floor=1e-8):
    """High-SNR noise-variance update from Rician amplitude moments.

    Uses ``2 * mean[(y - rho)^2]`` with ``rho = |z|`` under
    ``z ~ N(zhat, 1/zeta)``, which expands to
    ``2 * mean[y^2 - 2 y E[rho] + E[rho^2]]``.
    """
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("phaseless observations must be nonnegative")
    mean_rho, second_rho = rician_moments(np.abs(np.asarray(zhat)), zeta)
    val = 2.0 * float(np.mean(y**2 - 2.0 * y * mean_rho + second_rho))
    return max(val, floor)


def _radial_grid(a, zeta, order=64):
    """Gauss-Legendre nodes and normalized weights for the amplitude
    density of ``|z|`` with ``z ~ N(a * e^{j phi}, 1/zeta)``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    sigma = 1.0 / math.sqrt(2.0 * zeta)
    lo = np.maximum(a - 8.0 * sigma, 0.0)
    hi = a + 8.0 * sigma
    xi, wt = leggauss(order)
    half = 0.5 * (hi - lo)
    rho = 0.5 * (hi + lo)[None, :] + half[None, :] * xi[:, None]
    w = wt[:, None] * half[None, :]
    dens = w * rho * np.exp(-zeta * (rho - a[None, :]) ** 2) * sp.i0e(2.0 * zeta * rho * a[None, :])
    dens = dens / dens.sum(axis=0, keepdims=True)
    return rho, dens


def m_step_phaseless_variance_exact(
    y,
    zhat,
    zeta,
    nu_prev,
    *,
    inner_max_iters=25,
    inner_tol=1e-6,
    inner_damping=0.5,
    floor=1e-8,
    quad_nodes=64,
):
    """Implicit noise-variance update for the phaseless channel.

    The stationary variance satisfies

        ``nu = mean_i E[ y_i^2 + rho_i^2 - 2 y_i rho_i R0(2 rho_i y_i / nu) ]``

    with ``rho_i = |z_i|`` averaged over the belief ``z_i ~ N(zhat_i, 1/zeta)``
    (the integrand depends on the modulus only, so the angular integral is
    analytic and a radial quadrature remains).  Solved by damped fixed-point
    iteration from ``nu_prev``.
    """
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("phaseless observations must be nonnegative")
    a = np.abs(np.asarray(zhat))
    rho, dens = _radial_grid(a, zeta, order=quad_nodes)
    ysq = float(np.mean(y**2))
    rr = (dens * rho**2).sum(axis=0)
    yrho = y[None, :] * rho

    def step(nu):
        r0 = bessel_ratio_r0(2.0 * yrho / nu)
        cross = (dens * yrho * r0).sum(axis=0)
        return ysq + float(np.mean(rr)) - 2.0 * float(np.mean(cross))

    nu = max(float(nu_prev), floor)
    converged = False
    rel = np.inf
    for _ in range(inner_max_iters):
        target = max(step(nu), floor)
        new = inner_damping * target + (1.0 - inner_damping) * nu
        rel = abs(new - nu) / max(nu, floor)
        nu = new
        if rel < inner_tol:
            converged = True
            break
    if not converged:
        converged = rel <= 10.0 * inner_tol
    return PhaselessVarianceUpdate(max(nu, floor), converged)


def _update_theta(theta, y, state, cfg):
    prior = theta.prior
    channel = theta.channel
    changes = []

    if cfg.learn_noise:
        old = channel.noise_variance
        if isinstance(channel, PhaselessAwgnChannel):
            if cfg.variance_update == "exact":
                upd = m_step_phaseless_variance_exact(
                    y,
                    state.zhat,
                    state.zeta,
                    old,
                    inner_max_iters=cfg.inner_max_iters,
                    inner_tol=cfg.inner_tol,
                    inner_damping=cfg.inner_damping,
                    floor=cfg.nu_floor,
                )
                nu = upd.value
            else:
                nu = m_step_phaseless_variance_highsnr(y, state.zhat, state.zeta, floor=cfg.nu_floor)
        elif isinstance(channel, AwgnChannel):
            nu = m_step_awgn_variance(y, state.zhat, state.zeta, floor=cfg.nu_floor)
        else:
            raise TypeError(f"no noise-variance update for {type(channel).__name__}")
        channel = replace(channel, noise_variance=nu)
        changes.append(abs(nu - old) / max(abs(old), cfg.nu_floor))

    if cfg.learn_prior:
        if isinstance(prior, (CircularGaussianPrior, GaussianPrior)):
            mean, variance = m_step_prior_gaussian(state.xhat, state.eta, floor=cfg.nu_floor)
            old_mean, old_var = prior.mean, prior.variance
            if isinstance(prior, GaussianPrior):
                mean = float(np.real(mean))
            prior = replace(prior, mean=mean, variance=variance)
            scale = max(abs(old_mean), np.sqrt(old_var))
            changes.append(abs(mean - old_mean) / scale)
            changes.append(abs(variance - old_var) / old_var)
        elif isinstance(prior, BernoulliGaussianPrior):
            raise TypeError("spike-and-slab prior learning is not supported")

    return ThetaEstimate(prior=prior, channel=channel), max(changes, default=0.0)


def em_gvamp(model, y, theta0, em_cfg=None, gvamp_cfg=None, x_true=None):
    """Alternate engine runs (warm-started) with parameter updates.

    ``max_em_iters`` counts parameter updates: with zero the result is a
    plain engine run at ``theta0``.  When the parameter estimate stops
    moving while the engine has not converged, the run is flagged STALLED
    rather than CONVERGED.  An optional ``x_true`` is used only to record
    the phase-corrected error trajectory.
    """
    em_cfg = em_cfg or EmConfig()
    gvamp_cfg = gvamp_cfg or GvampConfig()
    theta = theta0
    state = gvamp_init(model, y, theta)
    history = []
    status = EmStatus.MAX_ITERS

    for k in range(em_cfg.max_em_iters + 1):
        result = gvamp_run(model, y, theta, gvamp_cfg, state=state)
        state = result.state
        nmse = phase_corrected_nmse(state.xhat, x_true) if x_true is not None else float("nan")
        history.append(
            EmIterRecord(
                em_iter=k,
                nu_w=theta.channel.noise_variance,
                nmse=nmse,
                gvamp_sweeps=len(result.trace),
                gvamp_status=result.status,
            )
        )
        if result.status is GvampStatus.DIVERGED:
            status = EmStatus.DIVERGED
            break
        if k == em_cfg.max_em_iters:
            break
        theta, rel_change = _update_theta(theta, y, state, em_cfg)
        if rel_change < em_cfg.em_tol:
            status = (
                EmStatus.CONVERGED
                if result.status is GvampStatus.CONVERGED
                else EmStatus.STALLED
            )
            break

    return EmResult(xhat=state.xhat, zhat=state.zhat, theta=theta, history=history, status=status)
