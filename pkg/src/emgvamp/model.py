"""Data model for generalized linear measurements.

A :class:`GlmModel` bundles a linear operator with a separable prior over
the input vector and a componentwise measurement channel over the
transform outputs.  Priors and channels expose posterior denoisers:
given a Gaussian pseudo-measurement of the block they return the
componentwise posterior mean and the average posterior variance, which is
all the moment-matching engine needs.

Complex blocks use the circular-Gaussian convention throughout: a
"variance" ``v`` means ``E|x - mu|^2 = v``, and a pseudo-measurement
precision ``gamma`` means the factor ``exp(-gamma |x - r|^2)``.  With
those conventions the shrinkage algebra is identical in the real and
complex cases; only densities (responsibilities, log-likelihoods,
sampling) depend on the field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sp

__all__ = [
    "DenoiserResult",
    "LinearOperator",
    "CircularGaussianPrior",
    "GaussianPrior",
    "BernoulliGaussianPrior",
    "AwgnChannel",
    "PhaselessAwgnChannel",
    "GlmModel",
    "ThetaEstimate",
    "sample_model",
]

# Average posterior variances are floored here so downstream precision
# ratios stay finite even when a denoiser collapses numerically.
_VAR_FLOOR = 1e-295

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = leggauss(order)
    return _GL_CACHE[order]


@dataclass(frozen=True)
class DenoiserResult:
    """Posterior mean of one block plus its average posterior variance."""

    mean: np.ndarray
    avg_variance: float


class LinearOperator:
    """Dense linear map with a cached singular value decomposition.

    The SVD is computed once at construction and reused by every
    joint-Gaussian solve; singular values below
    ``max(M, N) * s_max * 1e-12`` are treated as exact zeros (standard
    numerical rank).
    """

    def __init__(self, matrix):
        a = np.asarray(matrix)
        if a.ndim != 2:
            raise ValueError("operator matrix must be two-dimensional")
        if not np.all(np.isfinite(a)):
            raise ValueError("operator matrix must be finite")
        self.matrix = a
        u, s, vh = np.linalg.svd(a, full_matrices=False)
        if s.size:
            cutoff = max(a.shape) * s[0] * 1e-12
            s = np.where(s > cutoff, s, 0.0)
        self._u = u
        self._s = s
        self._vh = vh

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_complex(self):
        return np.iscomplexobj(self.matrix)

    @property
    def svd(self):
        """Thin SVD factors ``(u, s, vh)`` with rank-cut singular values."""
        return self._u, self._s, self._vh

    def matvec(self, x):
        return self.matrix @ x

    def rmatvec(self, y):
        return self.matrix.conj().T @ y


def _posterior_gaussian(prior_mean, prior_var, r, gamma):
    v = 1.0 / (1.0 / prior_var + gamma)
    mean = v * (prior_mean / prior_var + gamma * r)
    return mean, v


@dataclass(frozen=True)
class CircularGaussianPrior:
    """I.i.d. circular complex Gaussian prior."""

    mean: complex = 0.0 + 0.0j
    variance: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ValueError("variance must be positive and finite")

    @property
    def is_complex(self):
        return True

    def mean_vector(self, n):
        return np.full(n, complex(self.mean), dtype=complex)

    def marginal_variance(self):
        return self.variance

    def denoise(self, r, gamma):
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        r = np.asarray(r, dtype=complex)
        mean, v = _posterior_gaussian(complex(self.mean), self.variance, r, gamma)
        return DenoiserResult(mean, max(v, _VAR_FLOOR))

    def sample(self, n, rng):
        noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return complex(self.mean) + np.sqrt(self.variance / 2.0) * noise


@dataclass(frozen=True)
class GaussianPrior:
    """I.i.d. real Gaussian prior."""

    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ValueError("variance must be positive and finite")

    @property
    def is_complex(self):
        return False

    def mean_vector(self, n):
        return np.full(n, float(self.mean))

    def marginal_variance(self):
        return self.variance

    def denoise(self, r, gamma):
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        r = np.asarray(r, dtype=float)
        mean, v = _posterior_gaussian(float(self.mean), self.variance, r, gamma)
        return DenoiserResult(mean, max(v, _VAR_FLOOR))

    def sample(self, n, rng):
        return float(self.mean) + np.sqrt(self.variance) * rng.standard_normal(n)


@dataclass(frozen=True)
class BernoulliGaussianPrior:
    """Spike-and-slab prior: zero with probability ``1 - sparsity``, else a
    zero-mean Gaussian slab of the given variance.

    ``complex_field`` selects the circular-complex or real slab; with
    ``sparsity = 1`` the denoiser degenerates exactly to the corresponding
    Gaussian prior.
    """

    sparsity: float
    variance: float
    complex_field: bool = True

    def __post_init__(self):
        if not (0.0 < self.sparsity <= 1.0):
            raise ValueError("sparsity must be in (0, 1]")
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ValueError("variance must be positive and finite")

    @property
    def is_complex(self):
        return self.complex_field

    def mean_vector(self, n):
        dtype = complex if self.complex_field else float
        return np.zeros(n, dtype=dtype)

    def marginal_variance(self):
        return self.sparsity * self.variance

    def denoise(self, r, gamma):
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        dtype = complex if self.complex_field else float
        r = np.asarray(r, dtype=dtype)
        slab_v = 1.0 / (1.0 / self.variance + gamma)
        slab_m = slab_v * gamma * r

        # Responsibilities in log space; the marginal of the
        # pseudo-measurement has variance (prior var + 1/gamma) under the
        # slab and 1/gamma under the spike.
        r2 = np.abs(r) ** 2
        v_slab = self.variance + 1.0 / gamma
        v_spike = 1.0 / gamma
        if self.complex_field:
            log_slab = -np.log(np.pi * v_slab) - r2 / v_slab
            log_spike = -np.log(np.pi * v_spike) - r2 / v_spike
        else:
            log_slab = -0.5 * np.log(2.0 * np.pi * v_slab) - r2 / (2.0 * v_slab)
            log_spike = -0.5 * np.log(2.0 * np.pi * v_spike) - r2 / (2.0 * v_spike)
        log_slab = log_slab + np.log(self.sparsity)
        log_spike = log_spike + (np.log1p(-self.sparsity) if self.sparsity < 1.0 else -np.inf)
        resp = np.exp(log_slab - np.logaddexp(log_slab, log_spike))

        mean = resp * slab_m
        var = resp * slab_v + resp * (1.0 - resp) * np.abs(slab_m) ** 2
        return DenoiserResult(mean, max(float(np.mean(var)), _VAR_FLOOR))

    def sample(self, n, rng):
        active = rng.random(n) < self.sparsity
        if self.complex_field:
            noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            vals = np.sqrt(self.variance / 2.0) * noise
        else:
            vals = np.sqrt(self.variance) * rng.standard_normal(n)
        return np.where(active, vals, 0.0 * vals)


@dataclass(frozen=True)
class AwgnChannel:
    """Additive Gaussian measurement channel ``y = z + w``.

    The field (real or circular complex) follows the dtype of ``z``.
    """

    noise_variance: float

    def __post_init__(self):
        if not (np.isfinite(self.noise_variance) and self.noise_variance > 0):
            raise ValueError("noise_variance must be positive and finite")

    def denoise(self, y, p, tau):
        if not tau > 0:
            raise ValueError("tau must be positive")
        nu = self.noise_variance
        v = 1.0 / (1.0 / nu + tau)
        mean = v * (np.asarray(y) / nu + tau * np.asarray(p))
        return DenoiserResult(mean, max(v, _VAR_FLOOR))

    def loglike(self, y, z):
        y = np.asarray(y)
        z = np.asarray(z)
        nu = self.noise_variance
        if np.iscomplexobj(z) or np.iscomplexobj(y):
            return -np.log(np.pi * nu) - np.abs(y - z) ** 2 / nu
        return -0.5 * np.log(2.0 * np.pi * nu) - (y - z) ** 2 / (2.0 * nu)

    def sample(self, z, rng):
        z = np.asarray(z)
        if np.iscomplexobj(z):
            noise = rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)
            return z + np.sqrt(self.noise_variance / 2.0) * noise
        return z + np.sqrt(self.noise_variance) * rng.standard_normal(z.shape)


@dataclass(frozen=True)
class PhaselessAwgnChannel:
    """Magnitude measurement channel ``y = |z + w|`` with circular complex noise.

    Conditional on ``z``, the observation is Rician.  The posterior of
    ``z`` under a circular-Gaussian pseudo-prior has magnitude-phase
    structure: the phase posterior given the modulus is von Mises around
    the pseudo-prior phase, so the angular integrals reduce to Bessel
    factors and only a one-dimensional radial integral remains.  That
    integral is evaluated with fixed-order Gauss-Legendre quadrature on a
    window around the radial posterior bulk.
    """

    noise_variance: float
    quad_nodes: int = 64

    def __post_init__(self):
        if not (np.isfinite(self.noise_variance) and self.noise_variance > 0):
            raise ValueError("noise_variance must be positive and finite")
        if self.quad_nodes < 8:
            raise ValueError("quad_nodes must be at least 8")

    def denoise(self, y, p, tau):
        if not tau > 0:
            raise ValueError("tau must be positive")
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise ValueError("phaseless observations must be nonnegative")
        p = np.asarray(p, dtype=complex)
        nu = self.noise_variance

        a = np.abs(p)
        unit = np.where(a > 0, p / np.where(a > 0, a, 1.0), 1.0 + 0.0j)

        # Radial weight: rho * exp(-(y-rho)^2/nu - tau*(rho-a)^2) times slowly
        # varying scaled-Bessel factors; the Gaussian part fixes the window.
        prec = 1.0 / nu + tau
        center = (y / nu + tau * a) / prec
        sigma = 1.0 / np.sqrt(2.0 * prec)
        lo = np.maximum(center - 8.0 * sigma, 0.0)
        hi = center + 8.0 * sigma

        xi, wt = _gl_nodes(self.quad_nodes)
        half = 0.5 * (hi - lo)
        rho = 0.5 * (hi + lo)[None, :] + half[None, :] * xi[:, None]
        w = wt[:, None] * half[None, :]

        expo = -((y[None, :] - rho) ** 2) / nu - tau * (rho - a[None, :]) ** 2
        expo -= expo.max(axis=0, keepdims=True)
        g = w * rho * np.exp(expo) * sp.i0e(2.0 * y[None, :] * rho / nu)

        k = 2.0 * tau * rho * a[None, :]
        d0 = g * sp.i0e(k)
        den = d0.sum(axis=0)
        # den can underflow to zero only for astronomically large inputs;
        # the resulting non-finite output is the engine's divergence signal
        with np.errstate(invalid="ignore", divide="ignore"):
            radial_mean = (rho * g * sp.i1e(k)).sum(axis=0) / den
            second = (rho**2 * d0).sum(axis=0) / den

        mean = unit * radial_mean
        var = np.maximum(second - radial_mean**2, 0.0)
        return DenoiserResult(mean, max(float(np.mean(var)), _VAR_FLOOR))

    def loglike(self, y, z):
        y = np.asarray(y, dtype=float)
        az = np.abs(np.asarray(z, dtype=complex))
        nu = self.noise_variance
        kappa = 2.0 * y * az / nu
        with np.errstate(divide="ignore"):
            out = np.where(
                y < 0,
                -np.inf,
                np.log(2.0 * np.abs(y) / nu)
                - (y - az) ** 2 / nu
                + np.log(sp.i0e(np.abs(kappa))),
            )
        return out

    def sample(self, z, rng):
        z = np.asarray(z, dtype=complex)
        noise = rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)
        return np.abs(z + np.sqrt(self.noise_variance / 2.0) * noise)


Prior = Union[CircularGaussianPrior, GaussianPrior, BernoulliGaussianPrior]
Channel = Union[AwgnChannel, PhaselessAwgnChannel]


@dataclass(frozen=True)
class GlmModel:
    """Generative model: ``x ~ prior``, ``z = A x``, ``y ~ channel(z)``."""

    operator: LinearOperator
    prior: Prior
    channel: Channel

    def __post_init__(self):
        if isinstance(self.channel, PhaselessAwgnChannel) and not (
            self.prior.is_complex or self.operator.is_complex
        ):
            raise ValueError("phaseless channel requires a complex transform output")


@dataclass(frozen=True)
class ThetaEstimate:
    """Current estimate of the tunable prior and channel parameters."""

    prior: Prior
    channel: Channel

    @classmethod
    def from_model(cls, model):
        return cls(prior=model.prior, channel=model.channel)


def sample_model(model, rng_seed):
    """Draw one instance ``(x, z, y)`` from the model, deterministically in the seed."""
    rng = np.random.default_rng(rng_seed)
    n = model.operator.shape[1]
    x = model.prior.sample(n, rng)
    z = model.operator.matvec(x)
    y = model.channel.sample(z, rng)
    return x, z, y
