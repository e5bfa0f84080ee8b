"""
Closed-form steady-state mean-square performance of incremental LMS.

Weighted norms are tracked in each node's eigenbasis, where the weighting
matrices stay diagonal and are represented by M-vectors. Node indices are
0-based ring positions and wrap modulo N, so ``k + 1`` at the last position
is position 0.

Main entry points: ``build_workspace`` then ``steady_state_msd`` /
``steady_state_emse``; ``fixed_point_check`` solves the same steady-state
relation by a Neumann series and serves as an independent check of the
linear solves.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningWarning, ConfigurationError, InstabilityError

STABILITY_MARGIN = 1e-9
CONDITION_LIMIT = 1e12
# warn once about eight digits are lost; cond <= 1/STABILITY_MARGIN for commuting factors
CONDITION_WARN = 1e8


@dataclass(frozen=True, eq=False)
class EigenProfile:
    eigvecs: np.ndarray
    eigvals: np.ndarray

    @classmethod
    def from_profile(cls, profile):
        return cls(profile.eigvecs, profile.eigvals)

    @property
    def lambda_mat(self):
        return np.diag(self.eigvals)


def joint_eigen(profiles, tol=1e-10):
    """
    Eigen profiles sharing one eigenbasis when the covariances commute.

    The weighting vectors of neighbouring nodes are only comparable entry by
    entry when both nodes use the same basis in the same order. If the
    covariances are not simultaneously diagonalisable, each node keeps its
    own basis.
    """
    covs = [p.regressor_cov for p in profiles]
    n = len(covs)
    mix = sum((1.0 + (k + 1) / (n + 1) * math.sqrt(2.0)) * c for k, c in enumerate(covs))
    _, u = np.linalg.eigh(mix)
    out = []
    for p, c in zip(profiles, covs):
        rotated = u.T @ c @ u
        lam = np.diagonal(rotated).copy()
        off = rotated - np.diag(lam)
        if np.max(np.abs(off)) > tol * max(1.0, float(np.max(np.abs(lam)))):
            return tuple(EigenProfile.from_profile(q) for q in profiles)
        out.append(EigenProfile(u, lam))
    return tuple(out)


def fbar(profile, eig=None):
    """``I - 2 mu L + 2 mu^2 L^2 + mu^2 l l^T`` for real Gaussian regressors."""
    lam = (eig or EigenProfile.from_profile(profile)).eigvals
    mu = profile.mu
    out = mu * mu * np.outer(lam, lam)
    out[np.diag_indices_from(out)] += 1.0 - 2.0 * mu * lam + 2.0 * mu * mu * lam * lam
    return out


def pi_product(k, l, fbars):
    """
    Ordered cyclic product ``F[k+l-1] F[k+l] ... F[N-1] F[0] ... F[k-1]``.

    ``l = 1`` gives the full N-factor cycle ending at position ``k - 1``;
    ``l = N + 1`` is the empty product (identity).
    """
    n = len(fbars)
    if not 0 <= k < n:
        raise ConfigurationError(f"node index {k} outside 0..{n - 1}")
    if not 1 <= l <= n + 1:
        raise ConfigurationError(f"offset {l} outside 1..{n + 1}")
    out = np.eye(fbars[0].shape[0])
    for j in range(k + l - 1, k + n):
        out = out @ fbars[j % n]
    return out


def g_vector(profile, eig=None):
    lam = (eig or EigenProfile.from_profile(profile)).eigvals
    return profile.mu ** 2 * profile.noise_var * lam


def a_vector(k, profiles, fbars, eigs=None):
    """``g[k] Pi(k,2) + g[k+1] Pi(k,3) + ... + g[k-2] Pi(k,N) + g[k-1]``."""
    n = len(profiles)
    eigs = eigs or [None] * n
    out = np.zeros(fbars[0].shape[0])
    for j in range(n):
        idx = (k + j) % n
        out = out + g_vector(profiles[idx], eigs[idx]) @ pi_product(k, j + 2, fbars)
    return out


@dataclass(frozen=True, eq=False)
class TheoryWorkspace:
    """
    Precomputed per-position quantities for a ring in visit order.

    ``cycle[k]`` is the full product ``Pi(k, 1)`` that carries weighting
    vectors once around the ring back to position ``k - 1``; ``a[k]`` the
    matching noise row vector. The estimate leaving position k is therefore
    governed by ``cycle[k + 1]`` and ``a[k + 1]``.
    """

    profiles: tuple
    eigs: tuple
    fbar: tuple
    g: tuple
    a: tuple
    cycle: tuple
    rbar_eta: tuple
    q: np.ndarray

    @property
    def num_nodes(self):
        return len(self.profiles)


def build_workspace(profiles, eta_cov=None):
    """
    Assemble the workspace for ``profiles`` (in ring order).

    ``eta_cov`` is the covariance of the per-step weight increment; ``None``
    means a stationary weight.
    """
    profiles = tuple(profiles)
    m = profiles[0].dim
    eigs = joint_eigen(profiles)
    fbars = tuple(fbar(p, e) for p, e in zip(profiles, eigs))
    eta = np.zeros((m, m)) if eta_cov is None else np.asarray(eta_cov, dtype=float)
    if eta.shape != (m, m):
        raise ConfigurationError(f"eta covariance has shape {eta.shape}, expected ({m}, {m})")
    return TheoryWorkspace(
        profiles=profiles,
        eigs=eigs,
        fbar=fbars,
        g=tuple(g_vector(p, e) for p, e in zip(profiles, eigs)),
        a=tuple(a_vector(k, profiles, fbars, eigs) for k in range(len(profiles))),
        cycle=tuple(pi_product(k, 1, fbars) for k in range(len(profiles))),
        rbar_eta=tuple(e.eigvecs.T @ eta @ e.eigvecs for e in eigs),
        q=np.ones(m),
    )


def spectral_radius(mat):
    return float(np.max(np.abs(np.linalg.eigvals(mat))))


def _check_stable(pi):
    rho = spectral_radius(pi)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise InstabilityError(
            f"cycle product has spectral radius {rho:.12g}; no steady state")
    return rho


def _trace_term(rbar_eta, vec):
    return float(np.diagonal(rbar_eta) @ vec)


def weighted_steady_state(k, workspace, weight):
    """
    Steady-state ``E|w_true - psi_k|^2`` weighted by ``diag(weight)`` in the
    eigenbasis of position k.

    Solves ``(I - Pi) s = weight`` with ``Pi`` the cycle product ending at k,
    then returns ``Tr(Rbar_eta diag(Pi s)) + a s``.
    """
    n = workspace.num_nodes
    nxt = (k + 1) % n
    pi = workspace.cycle[nxt]
    _check_stable(pi)
    lhs = np.eye(pi.shape[0]) - pi
    cond = np.linalg.cond(lhs)
    if not cond < CONDITION_WARN:
        warnings.warn(f"I - Pi has condition number {cond:.3g}", ConditioningWarning,
                      stacklevel=2)
    s = np.linalg.solve(lhs, np.asarray(weight, dtype=float))
    return _trace_term(workspace.rbar_eta[k], pi @ s) + float(workspace.a[nxt] @ s)


def steady_state_msd(k, workspace):
    """Steady-state MSD of the estimate leaving position k."""
    return weighted_steady_state(k, workspace, workspace.q)


def steady_state_emse(k, workspace, incoming=False):
    """
    Steady-state EMSE at position k.

    By default this weights the estimate leaving position k by that node's
    eigenvalues. With ``incoming=True`` it weights the estimate the node
    receives (the one its a-priori error is formed with), which is what the
    simulation measures; both coincide on homogeneous rings.
    """
    lam = workspace.eigs[k].eigvals
    if incoming:
        return weighted_steady_state((k - 1) % workspace.num_nodes, workspace, lam)
    return weighted_steady_state(k, workspace, lam)


def neumann_series(mat, vec, tol=1e-14, max_terms=10_000_000):
    """
    ``sum_j mat^j vec`` with compensated accumulation.

    Stops once the latest term is below ``tol * (1 - rho) * max|total|``, which
    bounds the discarded tail by ``tol`` relative to the sum.
    """
    rho = spectral_radius(mat)
    if rho >= 1.0:
        raise InstabilityError("Neumann series does not converge")
    term = np.array(vec, dtype=float)
    total = term.copy()
    comp = np.zeros_like(total)
    if not np.any(term):
        return total
    for _ in range(max_terms):
        term = mat @ term
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if np.max(np.abs(term)) <= tol * (1.0 - rho) * np.max(np.abs(total)):
            return total
    raise InstabilityError("Neumann series did not settle")


def fixed_point_check(k, workspace, weight):
    """
    Same quantity as ``weighted_steady_state`` via ``s = sum_j Pi^j weight``
    instead of a linear solve.
    """
    nxt = (k + 1) % workspace.num_nodes
    pi = workspace.cycle[nxt]
    s = neumann_series(pi, weight)
    return _trace_term(workspace.rbar_eta[k], pi @ s) + float(workspace.a[nxt] @ s)


def optimal_weight(profiles, cross_corrs):
    """``(sum_k R_u,k)^-1 (sum_k R_du,k)``."""
    r = sum(p.regressor_cov for p in profiles)
    rdu = sum(np.asarray(c, dtype=float) for c in cross_corrs)
    if np.linalg.cond(r) > CONDITION_LIMIT:
        raise ConfigurationError("sum of regressor covariances is singular")
    return np.linalg.solve(r, rdu)


@dataclass(frozen=True)
class MeanStability:
    stable: bool
    spectral_radius: float


def mean_stability(profiles):
    """Spectral radius of the mean error recursion ``I - sum_k mu_k R_u,k``."""
    m = profiles[0].dim
    mat = np.eye(m) - sum(p.mu * p.regressor_cov for p in profiles)
    rho = spectral_radius(mat)
    return MeanStability(rho < 1.0, rho)


def to_db(x):
    """``10 log10(x)``; zero maps to ``-inf``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(x)
    return float(out) if out.ndim == 0 else out
