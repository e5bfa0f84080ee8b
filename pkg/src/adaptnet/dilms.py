"""
Distributed incremental LMS over a ring.

At every time step the running estimate is handed from node to node in a
fixed visit order; each node applies one LMS correction with its own data and
passes the result on. The estimate held after the last node is the network
estimate for that time step.

``dilms_cycle`` runs one cycle for one realization and is the reference
implementation. ``run_cycles`` runs many cycles for a batch of independent
realizations at once; every arithmetic operation in it acts row-wise, so a
realization's trajectory does not depend on which batch it was placed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .models import NodeProfile


@dataclass(frozen=True, eq=False)
class NetworkConfig:
    profiles: tuple
    visit_order: tuple = None

    def __post_init__(self):
        profiles = tuple(self.profiles)
        if not profiles:
            raise ConfigurationError("network needs at least one node")
        dims = {p.dim for p in profiles}
        if len(dims) != 1:
            raise ConfigurationError(f"profiles disagree on dimension: {sorted(dims)}")
        order = tuple(range(len(profiles))) if self.visit_order is None \
            else tuple(int(k) for k in self.visit_order)
        if sorted(order) != list(range(len(profiles))):
            raise ConfigurationError(f"visit_order {order} is not a permutation")
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "visit_order", order)

    @classmethod
    def homogeneous(cls, num_nodes, dim, mu, noise_var, regressor_cov=None):
        cov = np.eye(dim) if regressor_cov is None else regressor_cov
        return cls(tuple(NodeProfile(mu, noise_var, cov) for _ in range(num_nodes)))

    @property
    def num_nodes(self):
        return len(self.profiles)

    @property
    def dim(self):
        return self.profiles[0].dim

    def ordered_profiles(self):
        """Profiles in visit order (ring position 0 first)."""
        return [self.profiles[k] for k in self.visit_order]


@dataclass
class DilmsState:
    """
    Network estimate plus what every node produced during the last cycle.

    ``psi[k]`` is node k's outgoing estimate, ``prior[k]`` the estimate it
    received, ``errors[k]`` its a-priori error. Arrays are indexed by node id,
    not by ring position.
    """

    w_global: np.ndarray
    psi: np.ndarray = None
    prior: np.ndarray = None
    errors: np.ndarray = None

    @classmethod
    def initial(cls, config, w_init=None):
        w = np.zeros(config.dim) if w_init is None else np.array(w_init, dtype=float)
        n = config.num_nodes
        return cls(w, np.tile(w, (n, 1)), np.tile(w, (n, 1)), np.zeros(n))


def dilms_cycle(config, state, measurements):
    """
    One spatial cycle of incremental LMS.

    Every node k, in visit order, takes the estimate of its predecessor,
    computes ``e = d - u @ psi_prev`` and returns ``psi_prev + mu * e * u``.
    The previous network estimate seeds the first node and the last node's
    output becomes the new network estimate.
    """
    if len(measurements) != config.num_nodes:
        raise ConfigurationError(
            f"{len(measurements)} measurements for {config.num_nodes} nodes")
    m = config.dim
    w = np.asarray(state.w_global, dtype=float)
    if w.shape != (m,):
        raise ConfigurationError(f"state has dimension {w.shape}, network expects ({m},)")
    psi = np.empty((config.num_nodes, m))
    prior = np.empty((config.num_nodes, m))
    errors = np.empty(config.num_nodes)
    current = w
    for k in config.visit_order:
        meas = measurements[k]
        u = np.asarray(meas.u, dtype=float)
        if u.shape != (m,):
            raise ConfigurationError(f"regressor at node {k} has shape {u.shape}")
        e = meas.d - u @ current
        prior[k] = current
        current = current + config.profiles[k].mu * e * u
        psi[k] = current
        errors[k] = e
    return DilmsState(current.copy(), psi, prior, errors)


@dataclass(frozen=True)
class NodeErrors:
    deviation2: np.ndarray
    weighted_deviation2: np.ndarray
    apriori_err2: np.ndarray


def tracking_errors(state, w_true, config):
    """
    Instantaneous squared errors per node.

    ``deviation2`` is ``|w_true - psi_k|^2``; ``weighted_deviation2`` is the
    incoming deviation ``w_true - psi_{k-1}`` weighted by the node's
    regressor covariance, whose ensemble mean is the EMSE; ``apriori_err2``
    is ``e_k^2``, whose mean is EMSE plus the noise variance.
    """
    w_true = np.asarray(w_true, dtype=float)
    dev = w_true - state.psi
    pre = w_true - state.prior
    weighted = np.array([pre[k] @ p.regressor_cov @ pre[k]
                         for k, p in enumerate(config.profiles)])
    return NodeErrors(np.sum(dev * dev, axis=1), weighted, state.errors ** 2)


@dataclass
class BatchTrace:
    """Outputs of ``run_cycles``; leading axes are (time, node id, run)."""

    post: np.ndarray
    prior: np.ndarray
    errors: np.ndarray
    w_global: np.ndarray = field(repr=False)
    step: np.ndarray = field(repr=False)
    diverged_at: np.ndarray = field(repr=False)


def run_cycles(config, w_global, regressors, desired, step, w_true=None,
               ceiling=np.inf):
    """
    Run consecutive cycles for a batch of realizations.

    Parameters
    ----------
    config : NetworkConfig
    w_global : ndarray, shape (B, M)
        Network estimate entering the first cycle, one row per realization.
    regressors : ndarray, shape (T, N, B, M)
    desired : ndarray, shape (T, N, B)
    step : ndarray, shape (N, B)
        Step-size per node and realization; a zero column freezes that
        realization.
    w_true : ndarray, shape (T, B, M), optional
        True weights; needed only for the divergence guard.
    ceiling : float
        A realization whose end-of-cycle squared deviation exceeds this (or
        is not finite) is frozen: its step-size column is zeroed so it stops
        moving instead of overflowing.

    Returns
    -------
    BatchTrace
        ``post`` and ``prior`` have shape (T, N, B, M), ``errors`` (T, N, B).
        ``diverged_at`` holds, per realization, the cycle index at which it
        was frozen, or -1.
    """
    t_len, n, b, m = regressors.shape
    post = np.empty_like(regressors)
    prior = np.empty_like(regressors)
    errors = np.empty(desired.shape)
    psi = np.array(w_global, dtype=float)
    step = np.array(step, dtype=float)
    diverged_at = np.full(b, -1)
    guard = w_true is not None and np.isfinite(ceiling)
    order = config.visit_order
    for t in range(t_len):
        u_t = regressors[t]
        d_t = desired[t]
        for k in order:
            u = u_t[k]
            prior[t, k] = psi
            e = d_t[k] - (u * psi).sum(axis=1)
            psi = psi + (step[k] * e)[:, None] * u
            post[t, k] = psi
            errors[t, k] = e
        if guard:
            dev = w_true[t] - psi
            bad = ~((dev * dev).sum(axis=1) <= ceiling)
            if bad.any():
                fresh = bad & (diverged_at < 0)
                diverged_at[fresh] = t
                step[:, bad] = 0.0
    return BatchTrace(post, prior, errors, psi, step, diverged_at)
