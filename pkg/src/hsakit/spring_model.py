"""The HSA as a programmable spring.

A twisted HSA behaves like a linear spring whose rest length and stiffness
are set by the twist angle ``theta`` (degrees, positive = extending twist).
Two model representations are supported:

* :class:`SpringFit` -- closed-form fits
  ``F_b = A th^2 + B th``, ``tau = D th^2 + C th``, ``k = C_k th + k0`` and
  ``L = C_l th + L0``.
* :class:`AnchorModel` -- piecewise-linear curves through sparse measured
  anchor points, for designs where only a handful of values are known.

Forces are signed: positive is tensile (the actuator pulls), negative is
compressive (the actuator pushes).  Nothing is extrapolated outside the
fitted angle range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .design_space import HsaDesign, TrajectoryPoint, parse_design_id
from .errors import DegenerateCoupling, InputError, LengthUnreachable, ThetaOutOfRange

# Slack for float round-off at the ends of an angle interval (deg).
THETA_TOL = 1e-9


class ForceDirection(Enum):
    PUSH = "push"
    PULL = "pull"
    NONE = "none"


def force_direction(force: float) -> ForceDirection:
    """Classify a signed force: compressive pushes, tensile pulls."""
    if force < 0:
        return ForceDirection.PUSH
    if force > 0:
        return ForceDirection.PULL
    return ForceDirection.NONE


def _check_theta(theta, lo, hi):
    th = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(th)) or np.any(th < lo - THETA_TOL) or np.any(th > hi + THETA_TOL):
        raise ThetaOutOfRange(f"theta {theta} outside valid range [{lo:g}, {hi:g}] deg")
    return th


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class SpringFit:
    """Fitted programmable-spring parameters for one design."""

    force_quad: float  # A, N/deg^2
    force_lin: float  # B, N/deg
    torque_lin: float  # C_tau, N*mm/deg
    stiffness_slope: float  # C_k, N/mm/deg
    rest_stiffness: float  # k0, N/mm
    length_slope: float  # C_l, mm/deg
    rest_length: float  # L0, mm
    theta_min: float
    theta_max: float
    torque_quad: float = 0.0  # D_tau, N*mm/deg^2
    r2_blocked: float = 1.0
    r2_torque: float = 1.0
    r2_stiffness: float = 1.0
    r2_length: float = 1.0
    design: HsaDesign | None = field(default=None, compare=False)
    name: str | None = None

    def __post_init__(self):
        if not self.rest_stiffness > 0:
            raise InputError("rest stiffness k0 must be positive")
        if not self.rest_length > 0:
            raise InputError("rest length L0 must be positive")
        if not self.theta_min <= self.theta_max:
            raise InputError("theta_min must not exceed theta_max")
        for name in ("r2_blocked", "r2_torque", "r2_stiffness", "r2_length"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InputError(f"{name} must lie in [0, 1]")
        for th in (self.theta_min, self.theta_max):
            if not self.stiffness_slope * th + self.rest_stiffness > 0:
                raise InputError(f"spring constant is not positive at theta={th:g}")

    @property
    def ident(self) -> str:
        if self.name:
            return self.name
        if self.design is not None:
            return self.design.ident
        return "unnamed"

    @property
    def trajectory_point(self) -> TrajectoryPoint | None:
        if self.design is not None:
            return self.design.trajectory_point
        try:
            return parse_design_id(self.ident)[0]
        except KeyError:
            return None

    def blocked_force(self, theta):
        th = _check_theta(theta, self.theta_min, self.theta_max)
        return _out(self.force_quad * th**2 + self.force_lin * th)

    def holding_torque(self, theta):
        th = _check_theta(theta, self.theta_min, self.theta_max)
        return _out(self.torque_quad * th**2 + self.torque_lin * th)

    def spring_constant(self, theta):
        th = _check_theta(theta, self.theta_min, self.theta_max)
        return _out(self.stiffness_slope * th + self.rest_stiffness)

    def min_energy_length(self, theta):
        th = _check_theta(theta, self.theta_min, self.theta_max)
        return _out(self.length_slope * th + self.rest_length)


class Unit(Enum):
    FORCE_N = "Force_N"
    TORQUE_NMM = "Torque_Nmm"
    STIFFNESS_N_PER_MM = "Stiffness_NperMM"
    LENGTH_MM = "Length_mm"


@dataclass(frozen=True)
class AnchorCurve:
    """Piecewise-linear curve through sparse (theta, value) anchors."""

    thetas: tuple[float, ...]
    values: tuple[float, ...]
    unit: Unit

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.thetas) != len(self.values):
            raise InputError("anchor thetas and values differ in length")
        if len(self.thetas) < 2:
            raise InputError("an anchor curve needs at least two breakpoints")
        if np.any(np.diff(self.thetas) <= 0):
            raise InputError("anchor thetas must be strictly increasing")

    @classmethod
    def from_points(cls, points, unit: Unit) -> "AnchorCurve":
        th, val = zip(*points)
        return cls(th, val, unit)

    @property
    def theta_min(self) -> float:
        return self.thetas[0]

    @property
    def theta_max(self) -> float:
        return self.thetas[-1]

    def __call__(self, theta):
        th = _check_theta(theta, self.theta_min, self.theta_max)
        return _out(np.interp(th, self.thetas, self.values))


def anchor_value(curve: AnchorCurve, theta):
    """Linear interpolation between neighbouring anchors, exact at anchors."""
    return curve(theta)


@dataclass(frozen=True)
class AnchorModel:
    """A design described by anchor curves instead of fitted constants.

    Holding torque comes either from an anchor curve or, when
    ``torque_coefficients = (quad, lin)`` is set, from ``quad th^2 + lin th``.
    """

    name: str
    blocked: AnchorCurve
    stiffness: AnchorCurve
    length: AnchorCurve
    torque: AnchorCurve | None = None
    torque_coefficients: tuple[float, float] | None = None
    design: HsaDesign | None = field(default=None, compare=False)

    def __post_init__(self):
        expected = {
            "blocked": Unit.FORCE_N, "stiffness": Unit.STIFFNESS_N_PER_MM,
            "length": Unit.LENGTH_MM, "torque": Unit.TORQUE_NMM,
        }
        for attr, unit in expected.items():
            curve = getattr(self, attr)
            if curve is not None and curve.unit is not unit:
                raise InputError(f"{self.name}: {attr} curve has unit {curve.unit.value}")
        if (self.torque is None) == (self.torque_coefficients is None):
            raise InputError(f"{self.name}: give exactly one of a torque curve or torque coefficients")
        curves = [self.blocked, self.stiffness, self.length] + ([self.torque] if self.torque else [])
        lo = max(c.theta_min for c in curves)
        hi = min(c.theta_max for c in curves)
        if lo > hi:
            raise InputError(f"{self.name}: anchor curves share no common angle range")
        object.__setattr__(self, "_range", (lo, hi))
        if np.any(np.asarray(self.stiffness.values) <= 0):
            raise InputError(f"{self.name}: stiffness anchors must be positive")

    @property
    def ident(self) -> str:
        return self.name

    @property
    def theta_min(self) -> float:
        return self._range[0]

    @property
    def theta_max(self) -> float:
        return self._range[1]

    @property
    def trajectory_point(self) -> TrajectoryPoint | None:
        if self.design is not None:
            return self.design.trajectory_point
        try:
            return parse_design_id(self.name)[0]
        except KeyError:
            return None

    def _within(self, theta):
        return _check_theta(theta, self.theta_min, self.theta_max)

    def blocked_force(self, theta):
        return self.blocked(self._within(theta))

    def spring_constant(self, theta):
        return self.stiffness(self._within(theta))

    def min_energy_length(self, theta):
        return self.length(self._within(theta))

    def holding_torque(self, theta):
        th = self._within(theta)
        if self.torque is not None:
            return self.torque(th)
        quad, lin = self.torque_coefficients
        return _out(quad * th**2 + lin * th)


# Module-level API; each accepts a SpringFit or an AnchorModel.

def blocked_force(model, theta):
    """Force with the length held at the untwisted rest length (N, signed)."""
    return model.blocked_force(theta)


def holding_torque(model, theta):
    """Torque needed to hold ``theta`` at the minimum-energy length (N*mm)."""
    return model.holding_torque(theta)


def spring_constant(model, theta):
    return model.spring_constant(theta)


def min_energy_length(model, theta):
    return model.min_energy_length(theta)


def force_at(model, theta, length):
    """Spring force at an arbitrary held length; positive pulls back toward L."""
    length = np.asarray(length, dtype=float)
    if np.any(length <= 0):
        raise InputError("length must be positive")
    return _out(model.spring_constant(theta) * (length - model.min_energy_length(theta)))


def theta_for_length(fit: SpringFit, target_length):
    """Twist angle whose minimum-energy length equals ``target_length``."""
    if fit.length_slope == 0:
        raise DegenerateCoupling(f"{fit.ident}: rotation-extension coupling is zero")
    ends = sorted((fit.min_energy_length(fit.theta_min), fit.min_energy_length(fit.theta_max)))
    target = np.asarray(target_length, dtype=float)
    slack = 1e-9 * max(abs(ends[0]), abs(ends[1]))
    if np.any(target < ends[0] - slack) or np.any(target > ends[1] + slack):
        raise LengthUnreachable(
            f"{fit.ident}: length {target_length} outside reachable [{ends[0]:.4f}, {ends[1]:.4f}] mm"
        )
    theta = (target - fit.rest_length) / fit.length_slope
    return _out(np.clip(theta, fit.theta_min, fit.theta_max))


@dataclass(frozen=True)
class ConsistencyReport:
    thetas: np.ndarray
    blocked: np.ndarray  # |F_b(theta)|
    coupled: np.ndarray  # |k(theta) * C_l * theta|
    discrepancy: np.ndarray
    max_discrepancy: float


def consistency_report(fit: SpringFit, samples: int = 19) -> ConsistencyReport:
    """Compare the blocked-force fit against ``k * C_l * theta``.

    If the four fits were mutually consistent, holding the untwisted length
    would load the spring by ``k(th) * (L(th) - L0)``.  The relative
    discrepancy is ``| |F_b| - |k C_l th| | / |F_b|`` (0 where both vanish).
    Diagnostic only; large values are reported, not raised.
    """
    if samples < 2:
        raise InputError("samples must be >= 2")
    th = np.linspace(fit.theta_min, fit.theta_max, samples)
    fb = np.abs(fit.blocked_force(th))
    kc = np.abs(fit.spring_constant(th) * fit.length_slope * th)
    diff = np.abs(fb - kc)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(diff == 0, 0.0, diff / fb)
    return ConsistencyReport(th, fb, kc, rel, float(np.max(rel)))
