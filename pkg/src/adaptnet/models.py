"""
Stochastic inputs for the incremental network: node profiles, regressors,
measurement noise and the laws governing the unknown weight vector.

All arrays are real-valued. A weight vector is a 1-D array of length M and a
regressor is a 1-D array of length M used as a row vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

# crossover between the power series and the Hankel asymptotic expansion;
# both sides are accurate to ~1e-12 here
_J0_SERIES_LIMIT = 12.0


def bessel_j0(x):
    """
    Bessel function of the first kind, order zero.

    Power series for ``|x| <= 12`` and the Hankel asymptotic expansion
    (truncated at its smallest term) beyond. Absolute error is below 1e-10
    for ``|x| <= 50``.

    Parameters
    ----------
    x : float
        Finite real argument.

    Returns
    -------
    float
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bessel_j0 needs a finite argument, got {x!r}")
    x = abs(x)
    if x <= _J0_SERIES_LIMIT:
        return _j0_series(x)
    return _j0_asymptotic(x)


def _j0_series(x):
    ratio = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= ratio / (k * k)
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            return total


def _j0_asymptotic(x):
    # a_k = prod_{j<=k} (-(2j-1)^2) / (k! (8x)^k); even k feed P, odd k feed Q
    z = 8.0 * x
    p = q = 0.0
    term = 1.0
    prev = math.inf
    k = 0
    while abs(term) < prev:
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * term
        else:
            q += sign * term
        prev = abs(term)
        k += 1
        term *= -((2 * k - 1) ** 2) / (k * z)
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


@dataclass(frozen=True)
class FadingSpec:
    """Doppler frequency (Hz), sampling period (s) and static path loss."""

    doppler_hz: float
    sample_period_s: float
    path_loss: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.doppler_hz) and self.doppler_hz >= 0):
            raise ConfigurationError("doppler_hz must be finite and >= 0")
        if not (math.isfinite(self.sample_period_s) and self.sample_period_s > 0):
            raise ConfigurationError("sample_period_s must be finite and > 0")
        if not math.isfinite(self.path_loss):
            raise ConfigurationError("path_loss must be finite")

    @property
    def alpha(self):
        return alpha_from_fading(self)


def alpha_from_fading(spec):
    """One-lag fading autocorrelation ``J0(2*pi*f_D*T_s)``."""
    return bessel_j0(2.0 * math.pi * spec.doppler_hz * spec.sample_period_s)


@dataclass(frozen=True, eq=False)
class NodeProfile:
    """
    Step-size, noise variance and regressor covariance of one node.

    The covariance is symmetrised and eigendecomposed once here; ``factor``
    is its symmetric square root, used to colour white regressors.
    """

    mu: float
    noise_var: float
    regressor_cov: np.ndarray
    eigvals: np.ndarray = field(init=False, repr=False)
    eigvecs: np.ndarray = field(init=False, repr=False)
    factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise ConfigurationError(f"mu must be >= 0, got {self.mu}")
        if not (math.isfinite(self.noise_var) and self.noise_var >= 0):
            raise ConfigurationError(f"noise_var must be >= 0, got {self.noise_var}")
        cov = np.array(self.regressor_cov, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ConfigurationError("regressor_cov must be a square matrix")
        if not np.all(np.isfinite(cov)):
            raise ConfigurationError("regressor_cov has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
            raise ConfigurationError("regressor_cov is not symmetric")
        cov = 0.5 * (cov + cov.T)
        lam, vecs = np.linalg.eigh(cov)
        if lam[0] <= 0:
            raise ConfigurationError("regressor_cov is not positive definite")
        cov.setflags(write=False)
        object.__setattr__(self, "regressor_cov", cov)
        object.__setattr__(self, "eigvals", lam)
        object.__setattr__(self, "eigvecs", vecs)
        object.__setattr__(self, "factor", (vecs * np.sqrt(lam)) @ vecs.T)

    @property
    def dim(self):
        return self.regressor_cov.shape[0]

    def with_mu(self, mu):
        return NodeProfile(mu, self.noise_var, self.regressor_cov)


@dataclass(frozen=True)
class Measurement:
    d: float
    u: np.ndarray
    v: float


def generate_measurement(profile, w_true, rng):
    """Draw ``(d, u, v)`` with ``d = u @ w_true + v`` for one node."""
    w_true = np.asarray(w_true, dtype=float)
    if w_true.shape != (profile.dim,):
        raise ConfigurationError(
            f"weight has shape {w_true.shape}, node expects ({profile.dim},)")
    u = rng.standard_normal(profile.dim) @ profile.factor
    v = math.sqrt(profile.noise_var) * rng.standard_normal()
    return Measurement(d=float(u @ w_true + v), u=u, v=v)


# --------------------------------------------------------------------------
# weight processes
#
# ``advance`` is the deterministic part of a step: given the previous weight
# (any leading batch shape), the iteration index and a block of standard
# normal draws of the same shape, it returns the next weight. The harness
# calls it in batch; ``next_weight`` wraps it for single draws.


@dataclass(frozen=True, eq=False)
class Static:
    w0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w0", _as_vector(self.w0, "w0"))

    @property
    def dim(self):
        return self.w0.shape[0]

    needs_noise = False

    def initial(self):
        return self.w0.copy()

    def advance(self, w_prev, i, z=None):
        return w_prev


@dataclass(frozen=True)
class Sinusoidal:
    """Four rotating (cos, sin) pairs, phase-shifted by pi/2, amplitude 1/2."""

    omega: float = math.pi / 3000

    dim = 8
    needs_noise = False

    def __post_init__(self):
        if not math.isfinite(self.omega):
            raise ConfigurationError("omega must be finite")

    def at(self, i):
        phase = self.omega * i + 0.5 * math.pi * np.arange(4)
        return 0.5 * np.column_stack([np.cos(phase), np.sin(phase)]).ravel()

    def initial(self):
        return self.at(0)

    def advance(self, w_prev, i, z=None):
        return np.broadcast_to(self.at(i), np.shape(w_prev)).copy()

    def rotate(self, w):
        """Apply the per-pair rotation by ``omega``; maps ``at(i)`` to ``at(i+1)``."""
        c, s = math.cos(self.omega), math.sin(self.omega)
        pairs = np.asarray(w, dtype=float).reshape(-1, 2)
        out = np.column_stack([c * pairs[:, 0] - s * pairs[:, 1],
                               s * pairs[:, 0] + c * pairs[:, 1]])
        return out.ravel()


@dataclass(frozen=True, eq=False)
class RandomWalk:
    """``w_i = alpha * w_{i-1} + eta_i`` with ``eta_i ~ N(0, (1 - alpha^2) I)``."""

    alpha: float
    w0: np.ndarray

    needs_noise = True

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and 0 < self.alpha <= 1):
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")
        object.__setattr__(self, "w0", _as_vector(self.w0, "w0"))

    @classmethod
    def from_fading(cls, spec, w0):
        """Random walk whose alpha is the Bessel correlation of ``spec``."""
        alpha = alpha_from_fading(spec)
        if alpha <= 0:
            raise ConfigurationError(
                f"fading spec gives alpha = {alpha:.6g}; the random walk needs alpha > 0")
        return cls(alpha, spec.path_loss * np.asarray(w0, dtype=float))

    @property
    def dim(self):
        return self.w0.shape[0]

    @property
    def eta_cov_scale(self):
        return 1.0 - self.alpha ** 2

    def eta_cov(self):
        return self.eta_cov_scale * np.eye(self.dim)

    def initial(self):
        return self.w0.copy()

    def advance(self, w_prev, i, z):
        return self.alpha * w_prev + math.sqrt(self.eta_cov_scale) * z


def next_weight(process, w_prev, i, rng):
    """
    One step of the weight law.

    Static returns ``w_prev``; Sinusoidal returns its closed form at ``i``;
    RandomWalk adds a fresh Gaussian increment drawn from ``rng``.
    """
    w_prev = np.asarray(w_prev, dtype=float)
    if w_prev.shape != (process.dim,):
        raise ConfigurationError(
            f"weight has shape {w_prev.shape}, process expects ({process.dim},)")
    z = rng.standard_normal(process.dim) if process.needs_noise else None
    return process.advance(w_prev, i, z)


def eta_covariance(process):
    """Covariance of the per-step weight increment (zero for deterministic laws)."""
    if isinstance(process, RandomWalk):
        return process.eta_cov()
    return np.zeros((process.dim, process.dim))


def _as_vector(w, name):
    w = np.array(w, dtype=float).reshape(-1)
    if w.size == 0 or not np.all(np.isfinite(w)):
        raise ConfigurationError(f"{name} must be a non-empty finite vector")
    w.setflags(write=False)
    return w
