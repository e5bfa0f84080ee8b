"""
Monte Carlo experiments: seeded realizations, ensemble-averaged learning
curves, trailing-window steady-state estimates and theory comparison.

Realizations are processed in fixed batches of ``run_batch`` runs. Each
batch reduces its runs in run order and the batch partials are added in
batch order, so the result is the same whether batches run serially or in a
process pool.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import theory
from .dilms import NetworkConfig, run_cycles
from .errors import ConfigurationError, InstabilityError
from .models import FadingSpec, RandomWalk, Sinusoidal, Static, eta_covariance

CHUNK = 500
RIPPLE_THRESHOLD = 0.25
METRICS = ("msd", "emse", "mse")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    One Monte Carlo experiment.

    ``process`` may be given as a ``FadingSpec``; it is then resolved to a
    random walk with ``alpha = J0(2 pi f_D T_s)`` started at ``w0_fading``
    (all ones by default) and the spec is kept in ``fading``.
    """

    network: NetworkConfig
    process: object
    iterations: int = 5000
    runs: int = 60
    steady_window: int = 500
    base_seed: int = 0
    run_batch: int = 20
    divergence_ceiling: float = 1e6
    w_init: np.ndarray = None
    fading: FadingSpec = None
    w0_fading: np.ndarray = None

    def __post_init__(self):
        if isinstance(self.process, FadingSpec):
            w0 = np.ones(self.network.dim) if self.w0_fading is None else self.w0_fading
            object.__setattr__(self, "fading", self.process)
            object.__setattr__(self, "process", RandomWalk.from_fading(self.process, w0))
        if not isinstance(self.process, (Static, Sinusoidal, RandomWalk)):
            raise ConfigurationError(f"unknown weight process {self.process!r}")
        if self.process.dim != self.network.dim:
            raise ConfigurationError(
                f"process dimension {self.process.dim} != network dimension {self.network.dim}")
        if self.iterations < 1 or self.runs < 1 or self.run_batch < 1:
            raise ConfigurationError("iterations, runs and run_batch must be >= 1")
        if not 1 <= self.steady_window <= self.iterations:
            raise ConfigurationError(
                f"steady_window {self.steady_window} not in 1..{self.iterations}")
        w_init = np.zeros(self.network.dim) if self.w_init is None \
            else np.array(self.w_init, dtype=float)
        if w_init.shape != (self.network.dim,):
            raise ConfigurationError("w_init has the wrong dimension")
        object.__setattr__(self, "w_init", w_init)

    @property
    def alpha(self):
        if isinstance(self.process, RandomWalk):
            return self.process.alpha
        return 1.0 if isinstance(self.process, Static) else None


@dataclass
class LearningCurves:
    """
    Ensemble-averaged squared errors, shape (iterations, N), linear scale.

    Columns are node ids. ``run_steady`` holds each run's own trailing-window
    mean, shape (runs, N, 3) in (msd, emse, mse) order, and ``diverged_at``
    the iteration at which each run was frozen (-1 if never).
    """

    msd: np.ndarray
    emse: np.ndarray
    mse: np.ndarray
    run_steady: np.ndarray = field(repr=False)
    diverged_at: np.ndarray = field(repr=False)
    steady_window: int = 500

    @property
    def msd_db(self):
        return theory.to_db(self.msd)

    @property
    def emse_db(self):
        return theory.to_db(self.emse)

    @property
    def mse_db(self):
        return theory.to_db(self.mse)

    @property
    def diverged_runs(self):
        return [int(r) for r in np.flatnonzero(self.diverged_at >= 0)]

    @property
    def all_diverged(self):
        return bool(np.all(self.diverged_at >= 0))

    def ripple(self, window=None):
        """Relative spread (std / mean) of the ensemble MSD over the trailing window."""
        window = window or self.steady_window
        tail = self.msd[-window:]
        with np.errstate(invalid="ignore", divide="ignore"):
            return tail.std(axis=0) / tail.mean(axis=0)

    def ripple_flag(self, window=None):
        r = self.ripple(window)
        return bool(np.any(~(r <= RIPPLE_THRESHOLD)))


def run_seeds(base_seed, run):
    """Independent (regressor, noise, weight) generators for run ``run``, seeded by ``base_seed + run``."""
    children = np.random.SeedSequence(int(base_seed) + int(run)).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def _weight_block(process, w_prev, start, count, zs):
    out = np.empty((count,) + w_prev.shape)
    w = w_prev
    for t in range(count):
        i = start + t
        if i == 0:
            w = np.broadcast_to(process.initial(), w_prev.shape).copy()
        else:
            w = process.advance(w, i, None if zs is None else zs[t])
        out[t] = w
    return out


def _run_batch(config, runs):
    """
    Simulate ``runs`` and return (partial sums, per-run steady means, divergence).

    Partial sums have shape (iterations, N, 3) and are accumulated over the
    runs in order.
    """
    net = config.network
    n, m, b = net.num_nodes, net.dim, len(runs)
    total_t = config.iterations
    window_start = total_t - config.steady_window
    gens = [run_seeds(config.base_seed, r) for r in runs]
    factors = np.stack([p.factor for p in net.profiles])
    noise_sd = np.array([math.sqrt(p.noise_var) for p in net.profiles])
    cov = np.stack([p.regressor_cov for p in net.profiles])
    step = np.repeat(np.array([p.mu for p in net.profiles])[:, None], b, axis=1)
    process = config.process

    sums = np.zeros((total_t, n, 3))
    steady = np.zeros((b, n, 3))
    diverged_at = np.full(b, -1)
    w_est = np.tile(config.w_init, (b, 1))
    w_true = np.zeros((b, m))

    with np.errstate(over="ignore", invalid="ignore"):
        for start in range(0, total_t, CHUNK):
            c = min(CHUNK, total_t - start)
            # per-run draws keep a run's streams independent of its batch
            regs = np.empty((c, n, b, m))
            noise = np.empty((c, n, b))
            zs = np.empty((c, b, m)) if process.needs_noise else None
            for j, (g_reg, g_noise, g_w) in enumerate(gens):
                z = g_reg.standard_normal((c, n, m))
                regs[:, :, j, :] = np.matmul(z.transpose(1, 0, 2), factors).transpose(1, 0, 2)
                noise[:, :, j] = g_noise.standard_normal((c, n)) * noise_sd
                if zs is not None:
                    zs[:, j, :] = g_w.standard_normal((c, m))
            w_blk = _weight_block(process, w_true, start, c, zs)
            w_true = w_blk[-1]
            desired = (regs * w_blk[:, None, :, :]).sum(axis=-1) + noise

            trace = run_cycles(net, w_est, regs, desired, step, w_true=w_blk,
                               ceiling=config.divergence_ceiling)
            w_est, step = trace.w_global, trace.step
            fresh = (trace.diverged_at >= 0) & (diverged_at < 0)
            diverged_at[fresh] = trace.diverged_at[fresh] + start

            dev = w_blk[:, None, :, :] - trace.post
            pre = w_blk[:, None, :, :] - trace.prior
            msd = (dev * dev).sum(axis=-1)
            emse = np.zeros_like(msd)
            for a in range(m):
                inner = np.zeros_like(msd)
                for bb in range(m):
                    inner += cov[:, a, bb][None, :, None] * pre[..., bb]
                emse += pre[..., a] * inner
            mse = trace.errors ** 2
            blk = np.stack([msd, emse, mse], axis=-1)  # (c, n, b, 3)

            for j in range(b):
                sums[start:start + c] += blk[:, :, j, :]
            lo = max(window_start - start, 0)
            if lo < c:
                steady += blk[lo:].sum(axis=0).transpose(1, 0, 2)
    return sums, steady / config.steady_window, diverged_at


def _batches(config):
    return [list(range(s, min(s + config.run_batch, config.runs)))
            for s in range(0, config.runs, config.run_batch)]


def run_experiment(config, threads=1):
    """
    Run every realization of ``config`` and average the squared errors.

    ``threads > 1`` spreads the fixed run batches over a process pool; the
    output is bit-identical to the serial path.
    """
    batches = _batches(config)
    if threads and threads > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(batches))) as pool:
            results = list(pool.map(_run_batch, [config] * len(batches), batches))
    else:
        results = [_run_batch(config, runs) for runs in batches]

    total = np.zeros_like(results[0][0])
    for sums, _, _ in results:
        total += sums
    mean = total / config.runs
    return LearningCurves(
        msd=mean[..., 0], emse=mean[..., 1], mse=mean[..., 2],
        run_steady=np.concatenate([r[1] for r in results]),
        diverged_at=np.concatenate([r[2] for r in results]),
        steady_window=config.steady_window,
    )


@dataclass(frozen=True)
class SteadyState:
    msd: np.ndarray
    emse: np.ndarray
    mse: np.ndarray

    @property
    def msd_db(self):
        return theory.to_db(self.msd)

    @property
    def emse_db(self):
        return theory.to_db(self.emse)

    @property
    def mse_db(self):
        return theory.to_db(self.mse)


def steady_state_estimate(curves, window):
    """Mean of the last ``window`` iterations of each linear curve."""
    length = curves.msd.shape[0]
    if not 1 <= window <= length:
        raise ConfigurationError(f"window {window} not in 1..{length}")
    return SteadyState(*(getattr(curves, k)[-window:].mean(axis=0) for k in METRICS))


@dataclass
class SteadyStateReport:
    """
    Per-node theory and simulation steady states in dB, indexed by node id.

    Gaps are theory minus simulation. Theory entries are NaN when the
    recursion has no steady state (``theory_stable`` False) or when the
    weight process has no closed form (``theory_stable`` None).
    """

    msd_theory_db: np.ndarray
    emse_theory_db: np.ndarray
    msd_sim_db: np.ndarray
    emse_sim_db: np.ndarray
    theory_stable: bool
    metadata: dict
    msd_sim_run_std_db: np.ndarray = None

    @property
    def msd_gap_db(self):
        return _gap(self.msd_theory_db, self.msd_sim_db)

    @property
    def emse_gap_db(self):
        return _gap(self.emse_theory_db, self.emse_sim_db)


def _gap(th, sim):
    th, sim = np.asarray(th), np.asarray(sim)
    with np.errstate(invalid="ignore"):
        gap = th - sim
    both_floor = np.isneginf(th) & np.isneginf(sim)
    return np.where(both_floor, 0.0, gap)


def theory_values(config):
    """
    Closed-form steady-state (MSD, EMSE) per node id, linear scale.

    The EMSE is taken on the estimate a node receives, matching the
    simulated a-priori error.
    """
    net = config.network
    if isinstance(config.process, Sinusoidal):
        raise ConfigurationError("no closed-form steady state for the sinusoidal process")
    ws = theory.build_workspace(net.ordered_profiles(), eta_covariance(config.process))
    msd = np.empty(net.num_nodes)
    emse = np.empty(net.num_nodes)
    for pos, node in enumerate(net.visit_order):
        msd[node] = theory.steady_state_msd(pos, ws)
        emse[node] = theory.steady_state_emse(pos, ws, incoming=True)
    return msd, emse


def compare_theory(config, curves):
    sim = steady_state_estimate(curves, config.steady_window)
    n = config.network.num_nodes
    msd_th = emse_th = np.full(n, np.nan)
    stable = None
    if not isinstance(config.process, Sinusoidal):
        try:
            msd_th, emse_th = theory_values(config)
            stable = True
        except InstabilityError:
            stable = False
    with np.errstate(divide="ignore", invalid="ignore"):
        run_std = theory.to_db(curves.run_steady[..., 0]).std(axis=0)
    meta = {
        "alpha": config.alpha,
        "f_D": None if config.fading is None else config.fading.doppler_hz,
        "T_s": None if config.fading is None else config.fading.sample_period_s,
        "seed": config.base_seed,
        "runs": config.runs,
        "diverged_runs": curves.diverged_runs,
        "ripple_flag": curves.ripple_flag(config.steady_window),
    }
    return SteadyStateReport(
        msd_theory_db=theory.to_db(msd_th), emse_theory_db=theory.to_db(emse_th),
        msd_sim_db=sim.msd_db, emse_sim_db=sim.emse_db,
        theory_stable=stable, metadata=meta, msd_sim_run_std_db=run_std,
    )


def default_threads():
    return os.cpu_count() or 1
