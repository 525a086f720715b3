"""Expectation-consistent moment-matching iteration for generalized linear models.

One sweep alternates componentwise denoising of the two blocks (the
prior/channel beliefs) with the joint-Gaussian solve under the linear
constraint, exchanging extrinsic messages in both directions:

    gamma_ext = gamma * (1 - alpha) / alpha
    r_ext     = (mean - alpha * r) / (1 - alpha)

where ``alpha = gamma * avg_posterior_variance`` is the block sensitivity.
At a fixed point the three beliefs share first moments and per-block
average second moments.  Phaseless channels make the problem
non-log-concave, so means and precisions are damped (arithmetically and
geometrically, respectively) and precisions are clamped to a configurable
band.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .lmmse import lmmse_solve
from .model import PhaselessAwgnChannel

__all__ = [
    "GvampConfig",
    "GvampState",
    "GvampStatus",
    "SweepTrace",
    "GvampResult",
    "gvamp_init",
    "gvamp_iterate",
    "gvamp_run",
    "moment_gaps",
]

_ALPHA_MIN = 1e-11
_SPECTRAL_POWER_ITERS = 50
# consecutive sweeps with an active precision clamp before declaring divergence
_CLAMP_STREAK_LIMIT = 5


class GvampStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class GvampConfig:
    max_iters: int = 100
    tol: float = 1e-8
    damping: float = 0.8
    min_precision: float = 1e-11
    max_precision: float = 1e11

    def __post_init__(self):
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must be in (0, 1]")
        if not (0.0 < self.min_precision < self.max_precision):
            raise ValueError("precision clamp bounds must satisfy 0 < min < max")


@dataclass(frozen=True)
class GvampState:
    """The twelve moment-matching quantities plus a sweep counter."""

    r1: np.ndarray
    gamma1: float
    p1: np.ndarray
    tau1: float
    r2: np.ndarray
    gamma2: float
    p2: np.ndarray
    tau2: float
    xhat: np.ndarray
    eta: float
    zhat: np.ndarray
    zeta: float
    iteration: int = 0
    clamp_streak: int = 0


@dataclass(frozen=True)
class SweepTrace:
    rel_change: float
    eta: float
    zeta: float


@dataclass(frozen=True)
class GvampResult:
    state: GvampState
    status: GvampStatus
    trace: list


class _NumericalBreakdown(Exception):
    """Internal: a sweep produced non-finite quantities."""


def _clip_alpha(a):
    a = float(a)
    if not np.isfinite(a):
        raise _NumericalBreakdown
    return min(max(a, _ALPHA_MIN), 1.0 - _ALPHA_MIN)


def _clamp_precision(value, cfg):
    value = float(value)
    if not np.isfinite(value):
        raise _NumericalBreakdown
    clamped = min(max(value, cfg.min_precision), cfg.max_precision)
    return clamped, clamped != value


def _require_finite(*arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise _NumericalBreakdown


def _spectral_warm_start(op, y, prior):
    """Leading eigenvector of A^H diag(y^2) A, scaled to the prior's energy.

    Power iteration from the data-dependent direction A^H y^2;
    deterministic and phase-agnostic.  Falls back to zeros for all-zero
    data.
    """
    m, n = op.shape
    ysq = np.asarray(y, dtype=float) ** 2
    v = op.rmatvec(ysq * np.ones(m))
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return np.zeros(m, dtype=op.matrix.dtype)
    v = v / nrm
    for _ in range(_SPECTRAL_POWER_ITERS):
        v = op.rmatvec(ysq * op.matvec(v))
        nrm = np.linalg.norm(v)
        if nrm == 0:
            return np.zeros(m, dtype=op.matrix.dtype)
        v = v / nrm
    x0 = v * np.sqrt(n * prior.marginal_variance())
    return op.matvec(x0)


def gvamp_init(model, y, theta):
    """Initial state: prior-matched x block, channel-matched z block.

    For phaseless channels the z pseudo-mean gets a spectral warm start
    (a cold start can stall at the all-zero, phase-symmetric point); other
    channels start from zero.
    """
    m, n = model.operator.shape
    prior = theta.prior
    channel = theta.channel

    r1 = prior.mean_vector(n)
    gamma1 = 1.0 / prior.marginal_variance()
    tau1 = 1.0 / channel.noise_variance
    if isinstance(channel, PhaselessAwgnChannel):
        p1 = _spectral_warm_start(model.operator, y, prior)
    else:
        p1 = np.zeros(m, dtype=r1.dtype)

    return GvampState(
        r1=r1,
        gamma1=gamma1,
        p1=p1,
        tau1=tau1,
        r2=r1.copy(),
        gamma2=gamma1,
        p2=p1.copy(),
        tau2=tau1,
        xhat=r1.copy(),
        eta=gamma1,
        zhat=p1.copy(),
        zeta=tau1,
        iteration=0,
    )


def _sweep(state, model, y, theta, cfg):
    """One undamped sweep; returns the raw updates plus clamp bookkeeping."""
    clamped = False

    res_x = theta.prior.denoise(state.r1, state.gamma1)
    alpha_x = _clip_alpha(state.gamma1 * res_x.avg_variance)
    gamma2, c = _clamp_precision(state.gamma1 * (1.0 - alpha_x) / alpha_x, cfg)
    clamped |= c
    r2 = (res_x.mean - alpha_x * state.r1) / (1.0 - alpha_x)

    res_z = theta.channel.denoise(y, state.p1, state.tau1)
    beta_z = _clip_alpha(state.tau1 * res_z.avg_variance)
    tau2, c = _clamp_precision(state.tau1 * (1.0 - beta_z) / beta_z, cfg)
    clamped |= c
    p2 = (res_z.mean - beta_z * state.p1) / (1.0 - beta_z)

    _require_finite(r2, p2)
    lm = lmmse_solve(model.operator, r2, gamma2, p2, tau2)
    ax = _clip_alpha(lm.alpha_x)
    az = _clip_alpha(lm.alpha_z)
    gamma1_new, c = _clamp_precision(gamma2 * (1.0 - ax) / ax, cfg)
    clamped |= c
    r1_new = (lm.x2 - ax * r2) / (1.0 - ax)
    tau1_new, c = _clamp_precision(tau2 * (1.0 - az) / az, cfg)
    clamped |= c
    p1_new = (lm.z2 - az * p2) / (1.0 - az)

    return res_x, res_z, lm, r2, gamma2, p2, tau2, r1_new, gamma1_new, p1_new, tau1_new, clamped


def gvamp_iterate(state, model, y, theta, cfg):
    """One full sweep with damping; never raises on numeric trouble.

    Divergence (persistent precision clamping, non-finite means, or a
    numerical breakdown inside a sweep) is detected by :func:`gvamp_run`
    from the returned state; a breakdown returns the last finite state
    with the clamp streak saturated.
    """
    try:
        (res_x, res_z, _, r2, gamma2, p2, tau2,
         r1_new, gamma1_new, p1_new, tau1_new, clamped) = _sweep(state, model, y, theta, cfg)
    except _NumericalBreakdown:
        return replace(
            state, iteration=state.iteration + 1, clamp_streak=_CLAMP_STREAK_LIMIT
        )

    d = cfg.damping
    gamma1 = float(np.exp(d * np.log(gamma1_new) + (1.0 - d) * np.log(state.gamma1)))
    tau1 = float(np.exp(d * np.log(tau1_new) + (1.0 - d) * np.log(state.tau1)))
    r1 = d * r1_new + (1.0 - d) * state.r1
    p1 = d * p1_new + (1.0 - d) * state.p1

    return GvampState(
        r1=r1,
        gamma1=gamma1,
        p1=p1,
        tau1=tau1,
        r2=r2,
        gamma2=gamma2,
        p2=p2,
        tau2=tau2,
        xhat=res_x.mean,
        eta=1.0 / res_x.avg_variance,
        zhat=res_z.mean,
        zeta=1.0 / res_z.avg_variance,
        iteration=state.iteration + 1,
        clamp_streak=state.clamp_streak + 1 if clamped else 0,
    )


def _state_finite(state):
    return (
        np.all(np.isfinite(state.xhat))
        and np.all(np.isfinite(state.zhat))
        and np.all(np.isfinite(state.r1))
        and np.all(np.isfinite(state.p1))
        and np.isfinite(state.gamma1)
        and np.isfinite(state.tau1)
    )


def gvamp_run(model, y, theta, cfg, state=None):
    """Iterate sweeps until the relative change of the x-block mean drops
    below ``cfg.tol`` or the sweep budget is exhausted.

    A caller-provided ``state`` warm-starts the fixed point search.
    """
    if state is None:
        state = gvamp_init(model, y, theta)
    trace = []
    status = GvampStatus.MAX_ITERS
    for _ in range(cfg.max_iters):
        prev = state.xhat
        fresh = state.iteration == 0
        state = gvamp_iterate(state, model, y, theta, cfg)
        if not _state_finite(state):
            status = GvampStatus.DIVERGED
            break
        if state.clamp_streak >= _CLAMP_STREAK_LIMIT:
            status = GvampStatus.DIVERGED
            break
        if fresh:
            # the initial xhat is a placeholder, not a belief output, so the
            # first comparison carries no information (inf still satisfies an
            # infinite tolerance)
            rel = np.inf
        else:
            denom = np.linalg.norm(state.xhat)
            rel = float(np.linalg.norm(state.xhat - prev) / max(denom, 1e-300))
        trace.append(SweepTrace(rel, state.eta, state.zeta))
        if rel <= cfg.tol:
            status = GvampStatus.CONVERGED
            break
    return GvampResult(state, status, trace)


def moment_gaps(state, model, y, theta, cfg=None):
    """First- and second-moment mismatches between the beliefs at a state.

    Returns relative gaps between the denoiser means and the constrained
    joint-Gaussian means on both blocks, plus the corresponding average
    posterior-variance gaps.  At a converged fixed point all four vanish
    to within the convergence tolerance.
    """
    cfg = cfg or GvampConfig()
    res_x, res_z, lm, _, gamma2, _, tau2, *_ = _sweep(state, model, y, theta, cfg)
    x_gap = np.linalg.norm(res_x.mean - lm.x2) / max(np.linalg.norm(lm.x2), 1e-300)
    z_gap = np.linalg.norm(res_z.mean - lm.z2) / max(np.linalg.norm(lm.z2), 1e-300)
    trx_gap = abs(lm.alpha_x / gamma2 - res_x.avg_variance) / res_x.avg_variance
    trz_gap = abs(lm.alpha_z / tau2 - res_z.avg_variance) / res_z.avg_variance
    return {"x": float(x_gap), "z": float(z_gap), "tr_x": float(trx_gap), "tr_z": float(trz_gap)}
