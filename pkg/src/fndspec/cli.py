"""Batch command-line frontend for the characterization pipeline.

Subcommands
-----------
decompose   unmix PL spectra into NV charge-state components
odmr-fit    extract D and E from zero-field dip spectra
t1-fit      fit T1 decays from relaxometry trace CSVs
esr-sim     simulate one powder cw-ESR spectrum
esr-fit     fit a multi-species model to cw-ESR spectra
trend       aggregate result JSONs into size-trend tables
simulate    generate synthetic inputs for the fitters

Every option can also be given in a ``--config`` file of ``key=value``
lines keyed by the long flag name; an explicit flag beats the config
file, which beats the built-in default.  Batch inputs are fitted on a
worker pool (``--jobs``), one failing input never aborts the others,
and every run drops a ``manifest.json`` recording inputs, resolved
options and outputs.  Runs are deterministic: identical invocations
rewrite byte-identical result files, and subcommands that add noise
refuse to run without an explicit ``--seed``.

Exit codes: 0 all inputs processed, 1 some inputs failed, 2 unusable
configuration.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .esr import fit_esr, fit_result_to_dict, model_from_dict, simulate_cw_esr
from .odmr import PROFILES, fit_odmr, model_odmr, odmr_result_to_dict
from .pl import DEFAULT_NORMALIZATION_WINDOW, BasisPair, decompose, mix
from .reference import esr_model, esr_row_labels, zero_field_row
from .relaxometry import (
    RelaxometrySequence,
    contrast_signal,
    default_tau_grid,
    fit_t1,
    load_trace,
    save_trace,
    simulate_trace,
    t1_result_to_dict,
)
from .spectrum import (
    SampleDescriptor,
    Spectrum,
    load_spectrum,
    normalize_to_unit_max,
    resample,
    save_spectrum,
)
from .spinham import ZfsParameters


class ConfigError(Exception):
    """Unusable run configuration; reported once, exit code 2."""


@dataclass
class RunConfig:
    """Resolved options of one invocation."""

    command: str
    inputs: list[Path]
    out_dir: Path
    jobs: int
    fmt: str
    seed: int | None
    options: dict = field(default_factory=dict)


# ------------------------------------------------------------ resolution


def _load_config_file(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path!r} does not exist")
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{p.name}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


class _Resolver:
    """Flag > config file > default, with config values cast like flags."""

    def __init__(self, args: argparse.Namespace, file_entries: dict[str, str]):
        self._args = args
        self._file = file_entries

    def get(self, key: str, default, cast=str):
        flag = getattr(self._args, key.replace("-", "_"), None)
        if flag is not None:
            return flag
        if key in self._file:
            raw = self._file[key]
            try:
                return cast(raw)
            except ValueError as exc:
                raise ConfigError(f"config entry {key}={raw!r}: {exc}") from None
        return default


def _parse_window(raw: str) -> tuple[float, float]:
    parts = raw.replace(":", ",").split(",")
    if len(parts) != 2:
        raise ValueError(f"expected LO,HI, got {raw!r}")
    return float(parts[0]), float(parts[1])


def _check_inputs(paths: list[str]) -> list[Path]:
    inputs = [Path(p) for p in paths]
    for p in inputs:
        if not p.is_file():
            raise ConfigError(f"input {p} does not exist")
    return inputs


def _prepare_out(raw: str) -> Path:
    out = Path(raw)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


# --------------------------------------------------------------- writing


def _dump_json(data, path: Path) -> Path:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def _write_result(data: dict, out_dir: Path, name: str, fmt: str) -> Path:
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            for key in sorted(data):
                value = data[key]
                if isinstance(value, (dict, list)):
                    value = json.dumps(value, sort_keys=True)
                writer.writerow([key, value])
        return path
    return _dump_json(data, out_dir / f"{name}.json")


def _write_manifest(cfg: RunConfig, results: list[Path], failures: list[dict]
                    ) -> None:
    options_blob = json.dumps(cfg.options, sort_keys=True)
    payload = {
        "command": cfg.command,
        "version": __version__,
        "inputs": [str(p) for p in cfg.inputs],
        "options": cfg.options,
        "config_hash": hashlib.sha256(options_blob.encode()).hexdigest(),
        "results": [p.name for p in results],
        "failures": failures,
    }
    _dump_json(payload, cfg.out_dir / "manifest.json")


def _run_batch(cfg: RunConfig, worker, emit):
    """Fit inputs on a pool; write results serially from this thread.

    ``worker`` is pure (path -> payload) and may run concurrently;
    ``emit`` (path, payload -> written paths) runs here.  A worker
    exception becomes an error record for that input, nothing more.
    """
    results: list[Path] = []
    failures: list[dict] = []
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [(path, pool.submit(worker, path)) for path in cfg.inputs]
        for path, future in futures:
            try:
                payload = future.result()
            except Exception as exc:  # per-input isolation
                record = {"input": str(path),
                          "error": f"{type(exc).__name__}: {exc}"}
                _dump_json(record, cfg.out_dir / f"{path.stem}.error.json")
                failures.append(record)
                print(f"error: {path}: {exc}", file=sys.stderr)
            else:
                results.extend(emit(path, payload))
    return results, failures


def _maybe_float(raw):
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        return None


# ------------------------------------------------------------- commands


def _cmd_decompose(cfg: RunConfig, resolver: _Resolver):
    minus = resolver.get("basis-minus", None)
    zero = resolver.get("basis-zero", None)
    if (minus is None) != (zero is None):
        raise ConfigError("give both --basis-minus and --basis-zero or neither")
    basis = (BasisPair.load_default() if minus is None
             else BasisPair.from_files(minus, zero))
    window = resolver.get("window", DEFAULT_NORMALIZATION_WINDOW, _parse_window)
    if isinstance(window, list):
        window = tuple(window)
    plot = resolver.get("plot", False, _parse_bool)
    cfg.options.update(window=list(window), plot=plot,
                       basis=("default" if minus is None
                              else [str(minus), str(zero)]))

    def worker(path):
        measured = load_spectrum(path, "wavelength_nm")
        return measured, decompose(measured, basis, window)

    trend_rows = []

    def emit(path, payload):
        measured, result = payload
        sample = measured.metadata.get("sample")
        power = _maybe_float(measured.metadata.get("power_mW"))
        data = {"a1": result.a1, "a2": result.a2, "f": result.f,
                "residual_norm": result.residual_norm,
                "sample": sample, "laser_power": power}
        files = [_write_result(data, cfg.out_dir, f"{path.stem}.decomp", cfg.fmt)]
        trend_rows.append((path.name, sample, power, result.f))
        if plot:
            from .plots import overlay_svg
            inside = ((basis.axis >= measured.axis[0])
                      & (basis.axis <= measured.axis[-1]))
            grid = basis.axis[inside]
            shown = normalize_to_unit_max(resample(measured, grid), window)
            fitted = Spectrum(grid, mix(basis, result.a1, result.a2).values[inside],
                              "wavelength_nm")
            files.append(overlay_svg(cfg.out_dir / f"{path.stem}.decomp.svg",
                                     shown, fitted, title=sample or path.name))
        return files

    results, failures = _run_batch(cfg, worker, emit)

    trend_path = cfg.out_dir / "decompose_trend.csv"
    with open(trend_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["input", "sample", "termination", "diameter_nm",
                         "laser_power_mW", "f"])
        for name, sample, power, f in trend_rows:
            termination = diameter = ""
            if sample:
                try:
                    descriptor = SampleDescriptor.from_label(sample)
                    termination = descriptor.termination
                    diameter = descriptor.diameter_nm
                except ValueError:
                    pass
            writer.writerow([name, sample or "", termination, diameter,
                             "" if power is None else power, f])
    results.append(trend_path)
    return results, failures


def _cmd_odmr_fit(cfg: RunConfig, resolver: _Resolver):
    profile = resolver.get("profile", "gaussian")
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}")
    plot = resolver.get("plot", False, _parse_bool)
    cfg.options.update(profile=profile, plot=plot)

    def worker(path):
        spec = load_spectrum(path, "frequency_MHz")
        return spec, fit_odmr(spec, profile)

    def emit(path, payload):
        spec, result = payload
        files = [_write_result(odmr_result_to_dict(result), cfg.out_dir,
                               f"{path.stem}.odmr", cfg.fmt)]
        if plot:
            from .plots import overlay_svg
            fitted = model_odmr(ZfsParameters(result.d_mhz, result.e_mhz),
                                result.linewidth_mhz, result.contrast,
                                result.baseline, spec.axis,
                                profile=result.profile)
            files.append(overlay_svg(cfg.out_dir / f"{path.stem}.odmr.svg",
                                     spec, fitted, title=path.name))
        return files

    return _run_batch(cfg, worker, emit)


def _cmd_t1_fit(cfg: RunConfig, resolver: _Resolver):
    fix_offset = resolver.get("fix-offset", False, _parse_bool)
    cfg.options.update(fix_offset=fix_offset)

    def worker(path):
        return fit_t1(contrast_signal(load_trace(path)), fix_offset=fix_offset)

    def emit(path, result):
        return [_write_result(t1_result_to_dict(result), cfg.out_dir,
                              f"{path.stem}.t1", cfg.fmt)]

    return _run_batch(cfg, worker, emit)


def _esr_template(resolver: _Resolver):
    sample = resolver.get("sample", None)
    model_path = resolver.get("model", None)
    if (sample is None) == (model_path is None):
        raise ConfigError("give exactly one of --sample or --model")
    if sample is not None:
        try:
            return esr_model(sample), sample
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    p = Path(model_path)
    if not p.is_file():
        raise ConfigError(f"model file {p} does not exist")
    try:
        return model_from_dict(json.loads(p.read_text())), p.stem
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{p.name}: {exc}") from None


def _cmd_esr_sim(cfg: RunConfig, resolver: _Resolver):
    template, label = _esr_template(resolver)
    start = resolver.get("start", 329.0, float)
    stop = resolver.get("stop", 342.0, float)
    points = resolver.get("points", 2048, int)
    orientations = resolver.get("orientations", 512, int)
    nodes = resolver.get("strain-nodes", 7, int)
    plot = resolver.get("plot", False, _parse_bool)
    if not start < stop:
        raise ConfigError(f"empty field range [{start}, {stop}]")
    cfg.options.update(sample=label, start=start, stop=stop, points=points,
                       orientations=orientations, strain_nodes=nodes, plot=plot)

    axis = np.linspace(start, stop, points)
    spec = simulate_cw_esr(template, axis, n_orientations=orientations,
                           strain_nodes=nodes)
    spec = Spectrum(spec.axis, spec.values, spec.axis_kind, {"sample": label})
    out = cfg.out_dir / f"{label}.esr.csv"
    save_spectrum(spec, out)
    results = [out]
    if plot:
        from .plots import spectrum_svg
        results.append(spectrum_svg(cfg.out_dir / f"{label}.esr.svg", spec,
                                    title=label))
    return results, []


def _cmd_esr_fit(cfg: RunConfig, resolver: _Resolver):
    template, _ = _esr_template(resolver)
    orientations = resolver.get("orientations", 96, int)
    nodes = resolver.get("strain-nodes", 5, int)
    max_iterations = resolver.get("max-iterations", 100, int)
    cfg.options.update(orientations=orientations, strain_nodes=nodes,
                       max_iterations=max_iterations)

    def worker(path):
        spec = load_spectrum(path, "field_mT")
        return fit_esr(spec, template, n_orientations=orientations,
                       strain_nodes=nodes, max_iterations=max_iterations)

    def emit(path, result):
        return [_write_result(fit_result_to_dict(result), cfg.out_dir,
                              f"{path.stem}.esrfit", cfg.fmt)]

    return _run_batch(cfg, worker, emit)


def _cmd_trend(cfg: RunConfig, resolver: _Resolver, results_dir: str):
    source = Path(results_dir)
    if not source.is_dir():
        raise ConfigError(f"results directory {source} does not exist")
    cfg.options.update(results_dir=str(source))

    f_rows, rate_rows = [], []
    for path in sorted(source.glob("*.json")):
        if path.name == "manifest.json" or path.name.endswith(".error.json"):
            continue
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if not isinstance(data, dict):
            continue
        label = data.get("sample") or path.name.partition(".")[0]
        try:
            descriptor = SampleDescriptor.from_label(str(label))
        except ValueError:
            continue
        if "f" in data:
            f_rows.append([descriptor.label, descriptor.termination,
                           descriptor.diameter_nm, data.get("laser_power"),
                           data["f"]])
        if "rate_Hz" in data:
            rate_rows.append([descriptor.label, descriptor.termination,
                              descriptor.diameter_nm, data["rate_Hz"]])

    f_rows.sort(key=lambda r: (r[2], r[0], str(r[3])))
    rate_rows.sort(key=lambda r: (r[2], r[0]))

    f_path = cfg.out_dir / "trend_f.csv"
    with open(f_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "termination", "diameter_nm",
                         "laser_power_mW", "f"])
        writer.writerows(f_rows)
    rate_path = cfg.out_dir / "trend_rate.csv"
    with open(rate_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "termination", "diameter_nm", "rate_Hz"])
        writer.writerows(rate_rows)

    from .plots import trend_svg
    svg = trend_svg(cfg.out_dir / "trend.svg",
                    [(r[2], r[4]) for r in f_rows],
                    [(r[2], r[3]) for r in rate_rows])
    return [f_path, rate_path, svg], []


def _simulate_rng(cfg: RunConfig, noisy: bool):
    if not noisy:
        return None
    if cfg.seed is None:
        raise ConfigError("noise requires an explicit --seed")
    return np.random.default_rng(cfg.seed)


def _cmd_simulate(cfg: RunConfig, resolver: _Resolver):
    kind = resolver.get("kind", None)
    if kind not in ("pl", "odmr", "t1", "esr"):
        raise ConfigError("choose --kind from pl, odmr, t1, esr")
    sample = resolver.get("sample", None)
    noise = resolver.get("noise", 0.0, float)
    cfg.options.update(kind=kind, sample=sample, noise=noise)

    if kind == "pl":
        a1 = resolver.get("a1", 0.6, float)
        a2 = resolver.get("a2", 0.4, float)
        power = resolver.get("power", None, float)
        cfg.options.update(a1=a1, a2=a2, power=power)
        rng = _simulate_rng(cfg, noise > 0.0)
        spec = mix(BasisPair.load_default(), a1, a2)
        values = spec.values
        if rng is not None:
            values = values * (1.0 + noise * rng.standard_normal(values.size))
        metadata = {}
        if sample:
            metadata["sample"] = sample
        if power is not None:
            metadata["power_mW"] = f"{power:g}"
        out = cfg.out_dir / f"{sample or 'mix'}.pl.csv"
        save_spectrum(Spectrum(spec.axis, values, "wavelength_nm", metadata), out)
        return [out], []

    if kind == "odmr":
        d = resolver.get("d", None, float)
        e = resolver.get("e", None, float)
        if d is None or e is None:
            if sample is None:
                raise ConfigError("give --sample or both --d and --e")
            try:
                row = zero_field_row(sample)
            except (KeyError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
            d = row.d_mhz if d is None else d
            e = row.e_mhz if e is None else e
        linewidth = resolver.get("linewidth", 5.0, float)
        contrast = resolver.get("contrast", 0.15, float)
        baseline = resolver.get("baseline", 1.0, float)
        start = resolver.get("start", 2820.0, float)
        stop = resolver.get("stop", 2920.0, float)
        step = resolver.get("step", 0.2, float)
        cfg.options.update(d=d, e=e, linewidth=linewidth, contrast=contrast,
                           baseline=baseline, start=start, stop=stop, step=step)
        rng = _simulate_rng(cfg, noise > 0.0)
        axis = np.arange(start, stop + step / 2, step)
        spec = model_odmr(ZfsParameters(d, e), linewidth, contrast, baseline,
                          axis)
        values = spec.values
        if rng is not None:
            values = values * (1.0 + noise * rng.standard_normal(values.size))
        metadata = {"sample": sample} if sample else {}
        out = cfg.out_dir / f"{sample or 'odmr'}.odmr.csv"
        save_spectrum(Spectrum(axis, values, "frequency_MHz", metadata), out)
        return [out], []

    if kind == "t1":
        t1 = resolver.get("t1", None, float)
        if t1 is None:
            if sample is None:
                raise ConfigError("give --sample or --t1")
            try:
                t1 = zero_field_row(sample).t1_us
            except (KeyError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
        contrast = resolver.get("contrast", 0.1, float)
        counts = resolver.get("counts", 1e6, float)
        shot = resolver.get("shot-noise", False, _parse_bool)
        cfg.options.update(t1=t1, contrast=contrast, counts=counts,
                           shot_noise=shot)
        if shot and cfg.seed is None:
            raise ConfigError("noise requires an explicit --seed")
        sequence = RelaxometrySequence(default_tau_grid(t1))
        trace = simulate_trace(t1, sequence, contrast0=contrast,
                               counts_per_readout=counts, shot_noise=shot,
                               seed=cfg.seed)
        out = cfg.out_dir / f"{sample or 't1'}.trace.csv"
        save_trace(trace, out)
        return [out], []

    # kind == "esr": derivative spectra are signed, so the noise floor is
    # scaled off the largest excursion instead of point values
    template, label = _esr_template(resolver)
    start = resolver.get("start", 329.0, float)
    stop = resolver.get("stop", 342.0, float)
    points = resolver.get("points", 2048, int)
    orientations = resolver.get("orientations", 512, int)
    nodes = resolver.get("strain-nodes", 7, int)
    cfg.options.update(sample=label, start=start, stop=stop, points=points,
                       orientations=orientations, strain_nodes=nodes)
    rng = _simulate_rng(cfg, noise > 0.0)
    axis = np.linspace(start, stop, points)
    spec = simulate_cw_esr(template, axis, n_orientations=orientations,
                           strain_nodes=nodes)
    values = spec.values
    if rng is not None:
        scale = float(np.abs(values).max())
        values = values + noise * scale * rng.standard_normal(values.size)
    out = cfg.out_dir / f"{label}.esr.csv"
    save_spectrum(Spectrum(axis, values, "field_mT", {"sample": label}), out)
    return [out], []


# ---------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--config", metavar="FILE",
                        help="key=value file of option defaults")
    common.add_argument("--jobs", type=int, metavar="N",
                        help="parallel workers (default: cpu count)")
    common.add_argument("--seed", type=int, metavar="S",
                        help="random seed for noisy generators")
    common.add_argument("--format", choices=("json", "csv"),
                        help="result file format (default json)")

    parser = argparse.ArgumentParser(
        prog="fndspec",
        description="Simulate and fit nanodiamond characterization spectra.")
    parser.add_argument("--version", action="version",
                        version=f"fndspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common],
                       help="unmix PL spectra into charge-state components")
    p.add_argument("inputs", nargs="+", metavar="SPECTRUM")
    p.add_argument("--basis-minus", metavar="FILE")
    p.add_argument("--basis-zero", metavar="FILE")
    p.add_argument("--window", type=_parse_window, metavar="LO,HI")
    p.add_argument("--plot", action="store_const", const=True)

    p = sub.add_parser("odmr-fit", parents=[common],
                       help="fit zero-field dip spectra")
    p.add_argument("inputs", nargs="+", metavar="SPECTRUM")
    p.add_argument("--profile", choices=tuple(PROFILES))
    p.add_argument("--plot", action="store_const", const=True)

    p = sub.add_parser("t1-fit", parents=[common],
                       help="fit relaxometry traces")
    p.add_argument("inputs", nargs="+", metavar="TRACE")
    p.add_argument("--fix-offset", action="store_const", const=True)

    p = sub.add_parser("esr-sim", parents=[common],
                       help="simulate a powder cw-ESR spectrum")
    p.add_argument("--sample", metavar="LABEL",
                   help=f"reference row ({', '.join(esr_row_labels())})")
    p.add_argument("--model", metavar="FILE", help="model JSON")
    p.add_argument("--start", type=float, metavar="MT")
    p.add_argument("--stop", type=float, metavar="MT")
    p.add_argument("--points", type=int)
    p.add_argument("--orientations", type=int)
    p.add_argument("--strain-nodes", type=int)
    p.add_argument("--plot", action="store_const", const=True)

    p = sub.add_parser("esr-fit", parents=[common],
                       help="fit a species model to cw-ESR spectra")
    p.add_argument("inputs", nargs="+", metavar="SPECTRUM")
    p.add_argument("--sample", metavar="LABEL", help="template reference row")
    p.add_argument("--model", metavar="FILE", help="template model JSON")
    p.add_argument("--orientations", type=int)
    p.add_argument("--strain-nodes", type=int)
    p.add_argument("--max-iterations", type=int)

    p = sub.add_parser("trend", parents=[common],
                       help="aggregate result JSONs into size trends")
    p.add_argument("results_dir", metavar="DIR")

    p = sub.add_parser("simulate", parents=[common],
                       help="generate synthetic fitter inputs")
    p.add_argument("--kind", choices=("pl", "odmr", "t1", "esr"))
    p.add_argument("--sample", metavar="LABEL")
    p.add_argument("--noise", type=float, metavar="FRAC",
                   help="relative noise amplitude (needs --seed)")
    p.add_argument("--a1", type=float)
    p.add_argument("--a2", type=float)
    p.add_argument("--power", type=float, metavar="MW")
    p.add_argument("--d", type=float, metavar="MHZ")
    p.add_argument("--e", type=float, metavar="MHZ")
    p.add_argument("--linewidth", type=float, metavar="MHZ")
    p.add_argument("--contrast", type=float)
    p.add_argument("--baseline", type=float)
    p.add_argument("--t1", type=float, metavar="US")
    p.add_argument("--counts", type=float)
    p.add_argument("--shot-noise", action="store_const", const=True)
    p.add_argument("--model", metavar="FILE")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--orientations", type=int)
    p.add_argument("--strain-nodes", type=int)
    return parser


_HANDLERS = {
    "decompose": _cmd_decompose,
    "odmr-fit": _cmd_odmr_fit,
    "t1-fit": _cmd_t1_fit,
    "esr-sim": _cmd_esr_sim,
    "esr-fit": _cmd_esr_fit,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        file_entries = (_load_config_file(args.config)
                        if getattr(args, "config", None) else {})
        resolver = _Resolver(args, file_entries)
        out_dir = _prepare_out(resolver.get("out", "."))
        inputs = _check_inputs(getattr(args, "inputs", []) or [])
        jobs = resolver.get("jobs", os.cpu_count() or 1, int)
        if jobs < 1:
            raise ConfigError(f"--jobs must be at least 1, got {jobs}")
        fmt = resolver.get("format", "json")
        if fmt not in ("json", "csv"):
            raise ConfigError(f"unknown format {fmt!r}")
        seed = resolver.get("seed", None, int)
        cfg = RunConfig(command=args.command, inputs=inputs, out_dir=out_dir,
                        jobs=jobs, fmt=fmt, seed=seed,
                        options={"out": str(out_dir), "jobs": jobs,
                                 "format": fmt, "seed": seed})
        if args.command == "trend":
            results, failures = _cmd_trend(cfg, resolver, args.results_dir)
        else:
            results, failures = _HANDLERS[args.command](cfg, resolver)
        _write_manifest(cfg, results, failures)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
