"""Stress relaxation of a held HSA: plateau plus exponential modes.

The holding force after a step extension is modelled as a Prony series

    F(t) = F_inf + sum_i a_i exp(-t / tau_i)

written internally as ``F(0) - sum_i a_i (1 - exp(-t / tau_i))`` so that the
force at ``t = 0`` reproduces the measured peak exactly.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, nnls

from .errors import FitDivergence, InputError, NonDecreasingSeries


@dataclass(frozen=True)
class RelaxationModel:
    plateau: float  # N
    modes: tuple[tuple[float, float], ...]  # (amplitude N, time constant s)
    reference_peak: float  # N
    reference_extension: float = float("nan")  # mm

    def __post_init__(self):
        modes = tuple(sorted(((float(a), float(tau)) for a, tau in self.modes), key=lambda m: m[1]))
        object.__setattr__(self, "modes", modes)
        for amp, tau in modes:
            if amp < 0 or not tau > 0 or not math.isfinite(tau):
                raise InputError("mode amplitudes must be >= 0 and time constants > 0")
        total = self.plateau + sum(a for a, _ in modes)
        if not math.isclose(total, self.reference_peak, rel_tol=1e-6, abs_tol=1e-12):
            raise InputError(
                f"plateau + amplitudes = {total:.6g} N does not match peak {self.reference_peak:.6g} N"
            )

    @classmethod
    def from_peak(cls, peak: float, modes, reference_extension: float = float("nan")) -> "RelaxationModel":
        modes = tuple((float(a), float(t)) for a, t in modes)
        return cls(peak - sum(a for a, _ in modes), modes, float(peak), reference_extension)

    @property
    def time_constants(self) -> tuple[float, ...]:
        return tuple(tau for _, tau in self.modes)


def force_at_time(model: RelaxationModel, t):
    """Holding force after ``t`` seconds (scalar or array)."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise InputError("time must be non-negative")
    drop = sum(a * -np.expm1(-tt / tau) for a, tau in model.modes)
    out = model.reference_peak - drop
    return float(out) if np.ndim(out) == 0 else out


def retained_fraction(model: RelaxationModel, t):
    if not model.reference_peak > 0:
        raise InputError("reference peak must be positive")
    return force_at_time(model, t) / model.reference_peak


def max_hold_time(model: RelaxationModel, min_fraction: float, resolution: float = 1e-3) -> float:
    """Longest hold (s) keeping at least ``min_fraction`` of the peak force.

    Returns ``math.inf`` when the plateau alone stays above the threshold.
    """
    if not 0 < min_fraction < 1:
        raise InputError("min_fraction must lie in (0, 1)")
    if model.plateau / model.reference_peak >= min_fraction:
        return math.inf
    lo = 0.0
    hi = max(model.time_constants)
    while retained_fraction(model, hi) >= min_fraction:
        lo, hi = hi, 2 * hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if retained_fraction(model, mid) >= min_fraction:
            lo = mid
        else:
            hi = mid
    return lo


def _as_series(series):
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("expected a list of (time, force) pairs")
    t, f = arr[:, 0], arr[:, 1]
    if np.any(np.diff(t) <= 0):
        raise InputError("relaxation series must be strictly increasing in time")
    if t[0] != 0:
        raise InputError("relaxation series must start at the force peak, t = 0")
    return t, f


def _amplitudes(t, drop, taus):
    basis = np.column_stack([-np.expm1(-t / tau) for tau in taus])
    amps, _ = nnls(basis, drop)
    return amps, basis @ amps - drop


def window_time_constants(t, f, windows: Sequence[tuple[float, float]]) -> list[float]:
    """One exponential per time window: ``ln F`` regressed on ``t``."""
    taus = []
    for start, end in windows:
        keep = (t >= start) & (t <= end)
        if keep.sum() < 2:
            raise InputError(f"window [{start:g}, {end:g}] s holds fewer than two points")
        if np.any(f[keep] <= 0):
            raise InputError("windowed fits need positive forces")
        slope, _ = np.polyfit(t[keep], np.log(f[keep]), 1)
        if not slope < 0:
            raise FitDivergence(f"no decay inside window [{start:g}, {end:g}] s")
        taus.append(-1.0 / slope)
    return taus


def _grid_start(t, drop, n_modes):
    positive = t[t > 0]
    grid = np.logspace(np.log10(positive.min() / 10), np.log10(t.max() * 10), 49)
    best = None
    for idx in np.ndindex(*(len(grid),) * n_modes):
        if any(a >= b for a, b in zip(idx, idx[1:])):
            continue
        taus = grid[list(idx)]
        amps, res = _amplitudes(t, drop, taus)
        cost = float(res @ res)
        if best is None or cost < best[0]:
            best = (cost, amps, taus)
    return best[1], best[2]


def fit_relaxation(series, n_modes: int = 2, windows: Sequence[tuple[float, float]] | None = None,
                   reference_extension: float = float("nan")) -> RelaxationModel:
    """Fit a plateau plus ``n_modes`` exponential modes to a hold test.

    With ``windows`` the time constants come from separate log-linear fits
    over each window (one mode per window) and only the amplitudes are
    solved for.  Otherwise all amplitudes and time constants are fitted
    jointly by nonlinear least squares, started from the best point of a
    logarithmic grid of time constants.  The peak force is held fixed.
    """
    if n_modes not in (1, 2):
        raise InputError("n_modes must be 1 or 2")
    t, f = _as_series(series)
    if len(t) < 2 * n_modes + 1:
        raise InputError(f"need at least {2 * n_modes + 1} points for {n_modes} mode(s)")
    peak = float(f[0])
    drop = peak - f
    if not np.any(drop > 0):
        raise NonDecreasingSeries("force never falls below its initial value")

    if windows is not None:
        if len(windows) != n_modes:
            raise InputError("give one window per mode")
        taus = window_time_constants(t, f, windows)
        amps, _ = _amplitudes(t, drop, taus)
        return RelaxationModel.from_peak(peak, zip(amps, taus), reference_extension)

    amps, taus = _grid_start(t, drop, n_modes)
    scale = max(float(np.max(np.abs(drop))), 1e-12)

    def residual(p):
        a, log_tau = p[:n_modes], p[n_modes:]
        model = sum(ai * -np.expm1(-t / np.exp(lt)) for ai, lt in zip(a, log_tau))
        return (model - drop) / scale

    x0 = np.concatenate([amps, np.log(taus)])
    lower = np.concatenate([np.zeros(n_modes), np.full(n_modes, -30.0)])
    upper = np.concatenate([np.full(n_modes, np.inf), np.full(n_modes, 30.0)])
    x0 = np.clip(x0, lower, upper - 1e-9)
    sol = least_squares(residual, x0, bounds=(lower, upper), x_scale="jac")
    if not sol.success or not np.all(np.isfinite(sol.x)):
        raise FitDivergence(f"relaxation fit did not converge: {sol.message}")
    start_cost = float(np.sum(residual(x0) ** 2))
    p = sol.x if 2 * sol.cost <= start_cost else x0
    modes = [(float(a), float(np.exp(lt))) for a, lt in zip(p[:n_modes], p[n_modes:])]
    return RelaxationModel.from_peak(peak, modes, reference_extension)
