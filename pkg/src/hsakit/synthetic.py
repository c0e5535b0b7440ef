"""Synthetic cycling-test logs generated from a known spring model.

Used for fixtures and round-trip tests: the force trace is built so that the
extraction in :mod:`hsakit.fitting` recovers the generating constants
exactly when no noise is added.

At each twist the force is piecewise linear in displacement ``x``:
``k(th) * (x - x_L)`` on the side of the zero-force point ``x_L`` away from
the rest offset, and a straight line through ``(x_rest, F_b(th))`` and
``(x_L, 0)`` on the other side.  Torque is ``tau(th) + coupling*(x - x_L)``.
"""

from __future__ import annotations

import numpy as np

from .fitting import NOMINAL_SAMPLE_RATE, NOMINAL_TEST_SPEED, CycleTestRecord


def triangle_cycle(lo: float, hi: float, sample_rate: float = NOMINAL_SAMPLE_RATE,
                   speed: float = NOMINAL_TEST_SPEED) -> np.ndarray:
    """Displacement samples for one lo -> hi -> lo stroke (end sample excluded)."""
    n = max(4, round(2 * (hi - lo) / speed * sample_rate))
    phase = np.arange(n) / n
    return lo + (hi - lo) * np.where(phase <= 0.5, 2 * phase, 2 * (1 - phase))


def spring_force(fit, theta: float, x, printed_length: float):
    x = np.asarray(x, dtype=float)
    x_zero = fit.min_energy_length(theta) - printed_length
    x_rest = fit.min_energy_length(0.0) - printed_length
    k = fit.spring_constant(theta)
    spring = k * (x - x_zero)
    if x_zero == x_rest:
        return spring
    blocked = fit.blocked_force(theta) * (x - x_zero) / (x_rest - x_zero)
    far_side = (x >= x_zero) if x_zero > x_rest else (x <= x_zero)
    return np.where(far_side, spring, blocked)


def generate_cycle_log(fit, printed_length: float, thetas, cycling_range: tuple[float, float],
                       cycles: int = 10, sample_rate: float = NOMINAL_SAMPLE_RATE,
                       speed: float = NOMINAL_TEST_SPEED, noise: float = 0.0,
                       seed: int | None = None, torque_coupling: float = 0.5,
                       design: str | None = None) -> CycleTestRecord:
    """Stepped-twist cycling log: ``cycles`` strokes at each angle in turn.

    ``noise`` is the relative standard deviation of multiplicative Gaussian
    noise on the force and torque channels.
    """
    lo, hi = cycling_range
    stroke = triangle_cycle(lo, hi, sample_rate, speed)
    rng = np.random.default_rng(seed)
    disp, force, torque, theta = [], [], [], []
    for th in thetas:
        th = float(th)
        x = np.tile(stroke, cycles)
        f = spring_force(fit, th, x, printed_length)
        x_zero = fit.min_energy_length(th) - printed_length
        t = fit.holding_torque(th) + torque_coupling * (x - x_zero)
        disp.append(x)
        force.append(f)
        torque.append(t)
        theta.append(np.full_like(x, th))
    force = np.concatenate(force)
    torque = np.concatenate(torque)
    if noise:
        force = force * (1 + noise * rng.standard_normal(force.shape))
        torque = torque * (1 + noise * rng.standard_normal(torque.shape))
    disp = np.concatenate(disp)
    time = np.arange(len(disp)) / sample_rate
    return CycleTestRecord(time, disp, force, torque, np.concatenate(theta),
                           sample_rate=sample_rate, design=design, test_speed=speed)


def generate_dwell_record(zero_offsets, thetas, jog: float = 2.0, samples: int = 41,
                          stiffness: float = 1.0, sample_rate: float = NOMINAL_SAMPLE_RATE) -> CycleTestRecord:
    """Stepped-rotation record for zero-force displacement procedures.

    At each twist the crosshead jogs across ``[z - jog, z + jog]`` around the
    planted zero-force offset ``z`` while force reads ``stiffness * (x - z)``.
    """
    disp, force, theta = [], [], []
    for z, th in zip(zero_offsets, thetas):
        x = np.linspace(z - jog, z + jog, samples)
        disp.append(x)
        force.append(stiffness * (x - z))
        theta.append(np.full(samples, float(th)))
    disp = np.concatenate(disp)
    n = len(disp)
    return CycleTestRecord(np.arange(n) / sample_rate, disp, np.concatenate(force),
                           np.zeros(n), np.concatenate(theta), sample_rate=sample_rate)
