"""T1 relaxometry: pulse protocol, contrast construction, decay fit.

A measurement cycle polarizes the ensemble with an init laser pulse,
waits a delay tau, optionally applies a microwave pi pulse, and reads
the photoluminescence out with a second pulse.  The spin-lattice decay
shows up in the contrast between the two readout branches,

    S(tau) = 1 - R_on(tau) / R_off(tau),

which relaxes as a single exponential amplitude * exp(-tau / T1).  A
free offset is kept in the fit because imperfect polarization leaves
real traces with a floor; it can be pinned to zero.

Pulse durations ride along as metadata.  They matter for one check:
when the fitted T1 is comparable to the optical pulse lengths the
number is suspect, and ``short_t1`` flags that.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fitting import ParameterSpec, solve_nlls
from .spectrum import Spectrum

# flag fits with T1 below this multiple of (init + readout) duration
_SHORT_T1_FACTOR = 3.0
_T1_UPPER_FACTOR = 100.0


def default_tau_grid(t1_us: float, points: int = 30) -> np.ndarray:
    """Log-spaced delay schedule from 0.5 us to 20 * T1."""
    if t1_us <= 0.0:
        raise ValueError(f"T1 must be positive, got {t1_us}")
    return np.geomspace(0.5, 20.0 * t1_us, points)


@dataclass
class RelaxometrySequence:
    """Pulse protocol parameters, durations in the units of the names."""

    tau_list_us: np.ndarray
    init_pulse_us: float = 4.0
    pi_pulse_ns: float = 500.0
    readout_pulse_us: float = 3.0

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau_list_us, dtype=np.float64)
        if tau.size == 0:
            raise ValueError("tau list must be nonempty")
        if tau[0] <= 0.0 or np.any(np.diff(tau) <= 0.0):
            raise ValueError("tau list must be positive and strictly increasing")
        for name in ("init_pulse_us", "pi_pulse_ns", "readout_pulse_us"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        self.tau_list_us = tau

    def short_t1_threshold_us(self) -> float:
        return _SHORT_T1_FACTOR * (self.init_pulse_us + self.readout_pulse_us)


@dataclass
class RelaxometryTrace:
    """Readout counts with and without the pi pulse, per delay."""

    tau_us: np.ndarray
    r_on: np.ndarray
    r_off: np.ndarray

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau_us, dtype=np.float64)
        on = np.asarray(self.r_on, dtype=np.float64)
        off = np.asarray(self.r_off, dtype=np.float64)
        if not tau.size == on.size == off.size:
            raise ValueError(
                f"length mismatch: {tau.size} delays, {on.size} on, {off.size} off")
        if np.any(on < 0.0) or np.any(off < 0.0):
            raise ValueError("counts must be nonnegative")
        self.tau_us, self.r_on, self.r_off = tau, on, off


@dataclass
class T1FitResult:
    """Single-exponential decay parameters of one contrast trace."""

    t1_us: float
    t1_sigma: float | None
    amplitude: float
    offset: float
    residual_norm: float
    converged: bool

    def __post_init__(self) -> None:
        if self.t1_us <= 0.0:
            raise ValueError(f"T1 must be positive, got {self.t1_us}")
        if self.t1_sigma is not None and self.t1_sigma < 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.t1_sigma}")


def contrast_signal(trace: RelaxometryTrace) -> Spectrum:
    """S(tau) = 1 - R_on/R_off on a delay axis."""
    bad = np.nonzero(trace.r_off <= 0.0)[0]
    if bad.size:
        raise ValueError(
            f"R_off is not positive at tau = {trace.tau_us[bad[0]]:g} us")
    return Spectrum(trace.tau_us, 1.0 - trace.r_on / trace.r_off, "delay_us")


def fit_t1(signal: Spectrum, fix_offset: bool = False) -> T1FitResult:
    """Fit amplitude * exp(-tau/T1) + offset to a contrast signal.

    The initial T1 is the delay at which the offset-subtracted signal
    first falls to 1/e of its starting value.  Raises ValueError for a
    non-decaying trace (fitted amplitude <= 0).
    """
    if signal.axis_kind != "delay_us":
        raise ValueError(
            f"T1 fit needs a delay_us axis, got {signal.axis_kind!r}")
    if signal.axis.size < 4:
        raise ValueError(f"need at least 4 points, got {signal.axis.size}")
    if signal.axis[0] <= 0.0:
        raise ValueError("delays must be positive")

    tau, y = signal.axis, signal.values
    if np.ptp(y) == 0.0:
        raise ValueError("non-decaying signal: contrast is constant")
    offset0 = 0.0 if fix_offset else float(np.mean(y[-3:]))
    amp0 = float(y[0] - offset0)
    target = offset0 + amp0 / math.e
    below = np.nonzero(y <= target)[0] if amp0 > 0.0 else np.array([], int)
    t1_0 = float(tau[below[0]]) if below.size else float(tau[-1])
    t1_max = _T1_UPPER_FACTOR * float(tau[-1])

    def residual(p):
        return p[1] * np.exp(-tau / p[0]) + p[2] - y

    specs = [
        ParameterSpec("T1_us", min(t1_0, t1_max), 1e-6, t1_max),
        ParameterSpec("amplitude", amp0 if amp0 != 0.0 else 1e-3),
        ParameterSpec("offset", offset0, fixed=fix_offset),
    ]
    report = solve_nlls(residual, specs)
    amplitude = report["amplitude"].value
    if amplitude <= 0.0:
        raise ValueError(
            f"non-decaying signal: fitted amplitude {amplitude:g} is not positive")
    t1 = report["T1_us"]
    return T1FitResult(
        t1_us=t1.value, t1_sigma=t1.sigma,
        amplitude=amplitude, offset=report["offset"].value,
        residual_norm=report.residual_norm, converged=report.converged,
    )


def simulate_trace(t1_us: float, sequence: RelaxometrySequence,
                   contrast0: float = 0.1, counts_per_readout: float = 1e6,
                   shot_noise: bool = False, seed: int | None = None
                   ) -> RelaxometryTrace:
    """Synthetic trace with exponential contrast decay.

    R_off sits at counts_per_readout and R_on below it by the decaying
    contrast; with shot_noise both are Poisson-sampled (deterministic
    for a fixed seed).
    """
    if t1_us <= 0.0:
        raise ValueError(f"T1 must be positive, got {t1_us}")
    if not 0.0 < contrast0 <= 1.0:
        raise ValueError(f"contrast must be in (0, 1], got {contrast0}")
    if counts_per_readout <= 0.0:
        raise ValueError(
            f"counts per readout must be positive, got {counts_per_readout}")
    tau = sequence.tau_list_us
    on = counts_per_readout * (1.0 - contrast0 * np.exp(-tau / t1_us))
    off = np.full_like(tau, counts_per_readout)
    if shot_noise:
        rng = np.random.default_rng(seed)
        on = rng.poisson(on).astype(np.float64)
        off = rng.poisson(off).astype(np.float64)
    return RelaxometryTrace(tau, on, off)


def relaxation_rate(result: T1FitResult | float) -> float:
    """Longitudinal relaxation rate 1/T1 in Hz (T1 carried in us)."""
    t1 = result.t1_us if isinstance(result, T1FitResult) else float(result)
    if t1 <= 0.0:
        raise ValueError(f"T1 must be positive, got {t1}")
    return 1e6 / t1


def short_t1(result: T1FitResult, sequence: RelaxometrySequence | None = None
             ) -> bool:
    """True when T1 is comparable to the optical pulse durations."""
    if sequence is not None:
        threshold = sequence.short_t1_threshold_us()
    else:
        threshold = _SHORT_T1_FACTOR * (4.0 + 3.0)
    return bool(result.t1_us < threshold)


def t1_result_to_dict(result: T1FitResult,
                      sequence: RelaxometrySequence | None = None) -> dict:
    return {
        "T1_us": result.t1_us,
        "T1_sigma": result.t1_sigma,
        "amplitude": result.amplitude,
        "offset": result.offset,
        "rate_Hz": relaxation_rate(result),
        "short_T1_flag": short_t1(result, sequence),
    }


def save_trace(trace: RelaxometryTrace, path: str | Path) -> None:
    """Write a trace as tau_us,R_on,R_off CSV rows."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["tau_us", "R_on", "R_off"])
        for row in zip(trace.tau_us, trace.r_on, trace.r_off):
            writer.writerow([f"{v:.10g}" for v in row])


def load_trace(path: str | Path) -> RelaxometryTrace:
    """Read a tau_us,R_on,R_off CSV written by save_trace."""
    path = Path(path)
    rows = []
    with open(path, newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if lineno == 1 and row[0].strip() == "tau_us":
                continue
            if len(row) != 3:
                raise ValueError(
                    f"{path.name}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path.name}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path.name}: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return RelaxometryTrace(data[:, 0], data[:, 1], data[:, 2])
