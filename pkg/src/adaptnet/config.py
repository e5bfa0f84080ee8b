"""
Flat INI experiment files and the named scenario presets.

A file has up to three sections; every key is optional and falls back to
the default shown in ``SCHEMA``::

    [network]
    nodes = 20
    dim = 4
    mu = 0.0045              ; one value, or one per node
    noise_var = 0.01         ; one value, or one per node
    regressor_cov = identity ; identity | diag:v1,...,vM | scaled:s1,...,sN
    visit_order =            ; 1-based node numbers, default 1..N

    [process]
    kind = fading            ; static | sinusoidal | random_walk | fading
    w0 = ones                ; ones | zeros | sinusoid | v1,...,vM
    omega = 0.00104719755    ; sinusoidal only
    alpha = 1.0              ; random_walk only
    doppler_hz = 66          ; fading only
    sample_period_s = 1e-6   ; fading only
    path_loss = 1.0          ; fading only

    [experiment]
    iterations = 5000
    runs = 60
    steady_window = 500
    seed = 0
    run_batch = 20
    divergence_ceiling = 1e6

A ``[meta]`` section is ignored, so the meta file written next to every
result can be fed back with ``--config`` to repeat the run.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .dilms import NetworkConfig
from .errors import ConfigurationError
from .harness import ExperimentConfig
from .models import FadingSpec, NodeProfile, RandomWalk, Sinusoidal, Static

SCHEMA = {
    "network": {
        "nodes": "20",
        "dim": "4",
        "mu": "0.0045",
        "noise_var": "0.01",
        "regressor_cov": "identity",
        "visit_order": "",
    },
    "process": {
        "kind": "fading",
        "w0": "ones",
        "omega": repr(math.pi / 3000),
        "alpha": "1.0",
        "doppler_hz": "66",
        "sample_period_s": "1e-6",
        "path_loss": "1.0",
    },
    "experiment": {
        "iterations": "5000",
        "runs": "60",
        "steady_window": "500",
        "seed": "0",
        "run_batch": "20",
        "divergence_ceiling": "1e6",
    },
}

PROCESS_KINDS = ("static", "sinusoidal", "random_walk", "fading")
IGNORED_SECTIONS = ("meta",)


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    settings: dict
    description: str = ""
    sweep: tuple = None


PRESETS = {
    p.name: p for p in [
        ScenarioPreset(
            "stationary-baseline",
            {"network": {"dim": "8"}, "process": {"kind": "static", "w0": "sinusoid"}},
            "fixed weight equal to the sinusoidal vector at i = 0, M = 8",
        ),
        ScenarioPreset(
            "fig3-sinusoidal",
            {"network": {"dim": "8"}, "process": {"kind": "sinusoidal"}},
            "rotating 8-entry weight, omega = pi/3000",
        ),
        ScenarioPreset(
            "fig4-fading-sweep",
            {"process": {"kind": "fading", "doppler_hz": "66", "sample_period_s": "1e-6"}},
            "Rayleigh random walk, Doppler swept over 10, 66, 128 Hz at T_s = 1 us",
            sweep=("doppler", (10.0, 66.0, 128.0)),
        ),
        ScenarioPreset(
            "fig5-long-ts",
            {"process": {"kind": "fading", "doppler_hz": "128", "sample_period_s": "1e-3"}},
            "long sampling period, f_D = 128 Hz, T_s = 1 ms",
        ),
        ScenarioPreset(
            "fig6-theory-match",
            {"process": {"kind": "fading", "doppler_hz": "66", "sample_period_s": "1e-6"}},
            "theory against simulation, f_D = 66 Hz, T_s = 1 us",
        ),
    ]
}


def default_settings():
    return {sec: dict(keys) for sec, keys in SCHEMA.items()}


def merge_settings(base, overrides):
    """Overlay ``overrides`` on ``base``, rejecting unknown sections and keys."""
    out = {sec: dict(keys) for sec, keys in base.items()}
    for sec, keys in overrides.items():
        if sec in IGNORED_SECTIONS:
            continue
        if sec not in SCHEMA:
            raise ConfigurationError(f"unknown section [{sec}]")
        for key, value in keys.items():
            if key not in SCHEMA[sec]:
                raise ConfigurationError(f"unknown key '{key}' in [{sec}]")
            out[sec][key] = str(value).strip()
    return out


def read_settings(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return {sec: dict(parser[sec]) for sec in parser.sections()}


def format_settings(settings):
    """Canonical INI text; identical settings give identical text."""
    lines = []
    for sec in SCHEMA:
        lines.append(f"[{sec}]")
        lines.extend(f"{key} = {settings[sec][key]}" for key in SCHEMA[sec])
        lines.append("")
    return "\n".join(lines)


def settings_hash(settings):
    return hashlib.sha256(format_settings(settings).encode()).hexdigest()


def _floats(text, what):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{what}: cannot parse '{text}'") from exc
    if not vals:
        raise ConfigurationError(f"{what}: no values")
    return vals


def _scalar(text, what, kind=float):
    text = text.strip()
    try:
        if kind is int:
            try:
                return int(text)
            except ValueError:
                value = float(text)
                if not value.is_integer():
                    raise
                return int(value)
        return float(text)
    except ValueError as exc:
        raise ConfigurationError(f"{what}: cannot parse '{text}'") from exc


def _per_node(text, n, what):
    vals = _floats(text, what)
    if len(vals) == 1:
        return vals * n
    if len(vals) != n:
        raise ConfigurationError(f"{what}: expected 1 or {n} values, got {len(vals)}")
    return vals


def _covariances(text, n, m):
    text = text.strip()
    if text == "identity":
        return [np.eye(m)] * n
    if text.startswith("diag:"):
        vals = _floats(text[5:], "regressor_cov diag")
        if len(vals) != m:
            raise ConfigurationError(f"regressor_cov diag needs {m} values")
        return [np.diag(vals)] * n
    if text.startswith("scaled:"):
        return [s * np.eye(m) for s in _per_node(text[7:], n, "regressor_cov scaled")]
    raise ConfigurationError(f"regressor_cov: unknown form '{text}'")


def _w0(text, m):
    text = text.strip()
    if text == "ones":
        return np.ones(m)
    if text == "zeros":
        return np.zeros(m)
    if text == "sinusoid":
        if m != Sinusoidal.dim:
            raise ConfigurationError("w0 = sinusoid needs dim = 8")
        return Sinusoidal().initial()
    vals = _floats(text, "w0")
    if len(vals) != m:
        raise ConfigurationError(f"w0 needs {m} values, got {len(vals)}")
    return np.array(vals)


def build_network(net):
    n = _scalar(net["nodes"], "nodes", int)
    m = _scalar(net["dim"], "dim", int)
    if n < 1 or m < 1:
        raise ConfigurationError("nodes and dim must be >= 1")
    mus = _per_node(net["mu"], n, "mu")
    noise = _per_node(net["noise_var"], n, "noise_var")
    covs = _covariances(net["regressor_cov"], n, m)
    order = None
    if net["visit_order"].strip():
        order = [int(v) - 1 for v in _floats(net["visit_order"], "visit_order")]
    profiles = tuple(NodeProfile(mu, nv, c) for mu, nv, c in zip(mus, noise, covs))
    return NetworkConfig(profiles, order)


def build_process(proc, m):
    kind = proc["kind"].strip()
    if kind not in PROCESS_KINDS:
        raise ConfigurationError(f"process kind '{kind}' not one of {PROCESS_KINDS}")
    if kind == "sinusoidal":
        if m != Sinusoidal.dim:
            raise ConfigurationError("the sinusoidal process needs dim = 8")
        return Sinusoidal(_scalar(proc["omega"], "omega"))
    w0 = _w0(proc["w0"], m)
    if kind == "static":
        return Static(w0)
    if kind == "random_walk":
        return RandomWalk(_scalar(proc["alpha"], "alpha"), w0)
    return FadingSpec(_scalar(proc["doppler_hz"], "doppler_hz"),
                      _scalar(proc["sample_period_s"], "sample_period_s"),
                      _scalar(proc["path_loss"], "path_loss"))


def build_experiment(settings):
    """Turn validated settings into an ``ExperimentConfig``."""
    net = build_network(settings["network"])
    process = build_process(settings["process"], net.dim)
    exp = settings["experiment"]
    w0 = _w0(settings["process"]["w0"], net.dim) if isinstance(process, FadingSpec) else None
    return ExperimentConfig(
        network=net,
        process=process,
        iterations=_scalar(exp["iterations"], "iterations", int),
        runs=_scalar(exp["runs"], "runs", int),
        steady_window=_scalar(exp["steady_window"], "steady_window", int),
        base_seed=_scalar(exp["seed"], "seed", int),
        run_batch=_scalar(exp["run_batch"], "run_batch", int),
        divergence_ceiling=_scalar(exp["divergence_ceiling"], "divergence_ceiling"),
        w0_fading=w0,
    )


def preset_settings(name):
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset '{name}'; choose from {', '.join(PRESETS)}")
    return merge_settings(default_settings(), PRESETS[name].settings)
