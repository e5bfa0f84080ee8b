"""
Command line entry point.

    adaptnet --preset fig6-theory-match --out results/
    adaptnet --config my.ini --out results/ --runs 10 --seed 3
    adaptnet --preset fig4-fading-sweep --sweep doppler --values 10,66,128

Exit codes: 0 success, 1 I/O failure, 2 configuration or usage error,
3 every Monte Carlo run diverged.
"""

from __future__ import annotations

import argparse
import logging
import os
import subprocess
import sys
from pathlib import Path

from . import __version__
from . import config as cfg
from . import csvio
from .errors import ConfigurationError
from .harness import compare_theory, default_threads, run_experiment

log = logging.getLogger("adaptnet")

SWEEP_PARAMS = ("doppler", "sample-period", "alpha", "mu")
EXIT_IO, EXIT_CONFIG, EXIT_DIVERGED = 1, 2, 3


def version_string():
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=here, capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"adaptnet {__version__} ({out.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"adaptnet {__version__}"


def apply_overrides(settings, seed=None, runs=None, iterations=None):
    over = {}
    if seed is not None:
        over["seed"] = str(seed)
    if runs is not None:
        over["runs"] = str(runs)
    if iterations is not None:
        over["iterations"] = str(iterations)
        window = int(settings["experiment"]["steady_window"])
        if window > iterations:
            over["steady_window"] = str(iterations)
    return cfg.merge_settings(settings, {"experiment": over})


def sweep_settings(settings, param, value):
    """Settings with one swept parameter replaced by ``value``."""
    proc = settings["process"]
    if param in ("doppler", "sample-period"):
        if proc["kind"] != "fading":
            raise ConfigurationError(f"a {param} sweep needs a fading process")
        key = "doppler_hz" if param == "doppler" else "sample_period_s"
        return cfg.merge_settings(settings, {"process": {key: repr(float(value))}})
    if param == "alpha":
        if proc["kind"] == "sinusoidal":
            raise ConfigurationError("an alpha sweep needs a static, random-walk or fading base")
        return cfg.merge_settings(
            settings, {"process": {"kind": "random_walk", "alpha": repr(float(value))}})
    if param == "mu":
        return cfg.merge_settings(settings, {"network": {"mu": repr(float(value))}})
    raise ConfigurationError(f"unknown sweep parameter '{param}'; choose from {SWEEP_PARAMS}")


def _meta_text(name, settings, config, curves, report):
    lines = [
        cfg.format_settings(settings),
        "[meta]",
        f"name = {name}",
        f"version = {version_string()}",
        f"config_sha256 = {cfg.settings_hash(settings)}",
        f"seed = {config.base_seed}",
        f"alpha = {config.alpha!r}",
        f"runs = {config.runs}",
        f"diverged_runs = {','.join(map(str, curves.diverged_runs))}",
        f"ripple_flag = {int(curves.ripple_flag(config.steady_window))}",
        f"theory_stable = {report.theory_stable}",
        "",
    ]
    return "\n".join(lines)


def _provenance(name, settings):
    return (f"adaptnet name={name} seed={settings['experiment']['seed']} "
            f"config_sha256={cfg.settings_hash(settings)}")


def run_once(settings, threads):
    config = cfg.build_experiment(settings)
    curves = run_experiment(config, threads=threads)
    return config, curves, compare_theory(config, curves)


def run_scenario(name, settings, out_dir, threads=1):
    """Run one experiment and write curves, steady-state and meta files. Returns the exit code."""
    config, curves, report = run_once(settings, threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prov = _provenance(name, settings)
    csvio.write_curves(out / f"curves_{name}.csv", curves, prov)
    csvio.write_steady(out / f"steady_{name}.csv", report, prov)
    (out / f"meta_{name}.txt").write_text(_meta_text(name, settings, config, curves, report))
    if curves.diverged_runs:
        log.warning("%d of %d runs diverged", len(curves.diverged_runs), config.runs)
    return EXIT_DIVERGED if curves.all_diverged else 0


def sweep(param, values, name, settings, out_dir, threads=1):
    """Run the base settings once per value; write per-value reports and ``sweep_<param>.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    all_diverged = True
    for idx, value in enumerate(values):
        point = sweep_settings(settings, param, value)
        point_name = f"{name}_{param}_{idx}"
        config, curves, report = run_once(point, threads)
        prov = _provenance(point_name, point)
        csvio.write_steady(out / f"steady_{point_name}.csv", report, prov)
        (out / f"meta_{point_name}.txt").write_text(
            _meta_text(point_name, point, config, curves, report))
        entries.append((param, value, report))
        all_diverged &= curves.all_diverged
        log.info("%s = %g: mean sim MSD %.3f dB", param, value, report.msd_sim_db.mean())
    csvio.write_sweep(out / f"sweep_{param}.csv", entries, _provenance(name, settings))
    return EXIT_DIVERGED if all_diverged else 0


def _values(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--values: cannot parse '{text}'") from exc
    if not vals:
        raise ConfigurationError("--values is empty")
    return vals


def build_parser():
    p = argparse.ArgumentParser(
        prog="adaptnet",
        description="Incremental LMS tracking experiments: learning curves and "
                    "theory-vs-simulation steady-state tables.")
    p.add_argument("--preset", help=f"one of: {', '.join(cfg.PRESETS)}")
    p.add_argument("--config", help="INI experiment file (overrides the preset)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, help="base seed (fallback: $ADAPTNET_SEED)")
    p.add_argument("--runs", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--threads", type=int, default=default_threads(),
                   help="worker processes for Monte Carlo batches")
    p.add_argument("--sweep", choices=SWEEP_PARAMS)
    p.add_argument("--values", help="comma-separated sweep values")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.list_presets:
        for p in cfg.PRESETS.values():
            print(f"{p.name:22s} {p.description}")
        return 0
    try:
        if args.preset is None and args.config is None:
            raise ConfigurationError("give --preset or --config")
        settings = cfg.default_settings()
        name = "custom"
        preset = None
        if args.preset is not None:
            settings = cfg.preset_settings(args.preset)
            preset = cfg.PRESETS[args.preset]
            name = args.preset
        if args.config is not None:
            settings = cfg.merge_settings(settings, cfg.read_settings(args.config))
            if args.preset is None:
                name = Path(args.config).stem
        seed = args.seed
        if seed is None and os.environ.get("ADAPTNET_SEED"):
            try:
                seed = int(os.environ["ADAPTNET_SEED"])
            except ValueError as exc:
                raise ConfigurationError("ADAPTNET_SEED is not an integer") from exc
        settings = apply_overrides(settings, seed, args.runs, args.iterations)
        cfg.build_experiment(settings)  # validate before any output

        if args.sweep or args.values:
            if not (args.sweep and args.values):
                raise ConfigurationError("--sweep and --values go together")
            return sweep(args.sweep, _values(args.values), name, settings, args.out,
                         args.threads)
        if preset is not None and preset.sweep is not None and args.config is None:
            param, values = preset.sweep
            return sweep(param, values, name, settings, args.out, args.threads)
        return run_scenario(name, settings, args.out, args.threads)
    except ConfigurationError as exc:
        print(f"adaptnet: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"adaptnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
