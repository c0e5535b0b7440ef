"""HSA design parameters, tabulated test envelopes and the coil-spring baseline.

Twist angles are in degrees and lengths in millimetres throughout.  The
built-in design points live in ``data/design_points.csv``; append a row there
to register a new design without touching code.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import InputError, UnknownDesignPoint

DEFAULT_OUTER_DIAMETER = 21.0
DEFAULT_WALL_THICKNESS = 2.0


class Handedness(Enum):
    LEFT = "left"
    RIGHT = "right"


class TrajectoryPoint(Enum):
    """Point of the auxetic trajectory frozen in at fabrication."""

    CLOSED = "closed"
    SEMI_OPEN = "semi-open"
    OPEN = "open"

    @classmethod
    def parse(cls, text: str) -> "TrajectoryPoint":
        key = text.strip().lower().replace("_", "-").replace(" ", "-")
        if key == "semiopen":
            key = "semi-open"
        try:
            return cls(key)
        except ValueError:
            raise InputError(f"unknown trajectory point {text!r}") from None


class RotationSense(Enum):
    CLOCKWISE = "cw"
    COUNTERCLOCKWISE = "ccw"


class RotationEffect(Enum):
    SHORTENS = "shortens"
    EXTENDS = "extends"


# Normalised position along the auxetic trajectory (0 closed .. 1 open).
TRAJECTORY_COORDINATE = {
    TrajectoryPoint.CLOSED: 0.0,
    TrajectoryPoint.SEMI_OPEN: 0.5,
    TrajectoryPoint.OPEN: 1.0,
}


def design_id(trajectory_point: TrajectoryPoint, rows: int) -> str:
    """Canonical identifier, e.g. ``closed-8`` or ``semi-open-4``."""
    return f"{trajectory_point.value}-{rows}"


def parse_design_id(ident: str) -> tuple[TrajectoryPoint, int]:
    head, _, tail = ident.rpartition("-")
    try:
        return TrajectoryPoint.parse(head), int(tail)
    except (InputError, ValueError):
        raise UnknownDesignPoint(f"cannot parse design identifier {ident!r}") from None


@dataclass(frozen=True)
class HsaDesign:
    handedness: Handedness
    trajectory_point: TrajectoryPoint
    rows: int
    outer_diameter: float = DEFAULT_OUTER_DIAMETER
    wall_thickness: float = DEFAULT_WALL_THICKNESS
    printed_length: float = 75.0
    symmetry_order: int = 3

    def __post_init__(self):
        if self.rows < 1:
            raise InputError(f"rows must be >= 1, got {self.rows}")
        if self.symmetry_order < 1:
            raise InputError(f"symmetry_order must be >= 1, got {self.symmetry_order}")
        for name in ("outer_diameter", "wall_thickness", "printed_length"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not self.wall_thickness < self.outer_diameter / 2:
            raise InputError("wall_thickness must be less than outer_diameter / 2")

    @property
    def ident(self) -> str:
        return design_id(self.trajectory_point, self.rows)


@dataclass(frozen=True)
class TrajectoryPointSpec:
    """One tabulated test envelope (a row of the test-procedure tables)."""

    trajectory_point: TrajectoryPoint
    rows: int
    theta_min: float
    theta_max: float
    theta_step: float
    printed_length: float
    cycling_min: float
    cycling_max: float
    zero_force_displacement: float
    trajectory_coordinate: float

    def __post_init__(self):
        if self.rows < 1:
            raise InputError("rows must be >= 1")
        if self.theta_min > self.theta_max or self.theta_step <= 0:
            raise InputError("need theta_min <= theta_max and theta_step > 0")
        if self.cycling_min > self.cycling_max:
            raise InputError("need cycling_min <= cycling_max")
        if self.zero_force_displacement < 0:
            raise InputError("zero_force_displacement must be >= 0")
        if not 0.0 <= self.trajectory_coordinate <= 1.0:
            raise InputError("trajectory_coordinate must lie in [0, 1]")

    @property
    def ident(self) -> str:
        return design_id(self.trajectory_point, self.rows)

    @property
    def thetas(self) -> list[float]:
        n = round((self.theta_max - self.theta_min) / self.theta_step)
        return [self.theta_min + i * self.theta_step for i in range(n + 1)]

    def design(self, handedness: Handedness = Handedness.LEFT, **kwargs) -> HsaDesign:
        return HsaDesign(
            handedness=handedness,
            trajectory_point=self.trajectory_point,
            rows=self.rows,
            printed_length=self.printed_length,
            **kwargs,
        )


SPEC_FIELDS = (
    "trajectory_point", "rows", "theta_min", "theta_max", "theta_step",
    "printed_length", "cycling_min", "cycling_max", "zero_force_displacement",
    "trajectory_coordinate",
)


def load_design_points(path: str | Path | None = None) -> dict[tuple[TrajectoryPoint, int], TrajectoryPointSpec]:
    """Read a design-point CSV (defaults to the bundled table)."""
    if path is None:
        text = resources.files("hsakit.data").joinpath("design_points.csv").read_text()
    else:
        text = Path(path).read_text()
    reader = csv.DictReader(text.splitlines())
    if tuple(reader.fieldnames or ()) != SPEC_FIELDS:
        raise InputError(f"design-point header must be {','.join(SPEC_FIELDS)}")
    out = {}
    for row in reader:
        spec = TrajectoryPointSpec(
            trajectory_point=TrajectoryPoint.parse(row["trajectory_point"]),
            rows=int(row["rows"]),
            **{k: float(row[k]) for k in SPEC_FIELDS[2:]},
        )
        key = (spec.trajectory_point, spec.rows)
        if key in out:
            raise InputError(f"duplicate design point {spec.ident}")
        out[key] = spec
    return out


@lru_cache(maxsize=1)
def _bundled():
    return load_design_points()


def builtin_spec(trajectory_point: TrajectoryPoint, rows: int) -> TrajectoryPointSpec:
    """Tabulated test envelope for a design point.

    Only tested combinations are available; nothing is extrapolated.
    """
    try:
        return _bundled()[(trajectory_point, rows)]
    except KeyError:
        raise UnknownDesignPoint(
            f"no tabulated design point for {trajectory_point.value} with {rows} rows"
        ) from None


def builtin_specs() -> list[TrajectoryPointSpec]:
    return list(_bundled().values())


def rotation_effect(handedness: Handedness, sense: RotationSense) -> RotationEffect:
    # Left-handed: clockwise shortens.  Right-handed mirrors it.
    shortens = (handedness is Handedness.LEFT) == (sense is RotationSense.CLOCKWISE)
    return RotationEffect.SHORTENS if shortens else RotationEffect.EXTENDS


def rotation_sense(handedness: Handedness, theta: float) -> RotationSense | None:
    """Physical rotation sense for a twist angle.

    Positive ``theta`` always denotes the extending twist, so the physical
    sense depends on handedness.  Returns ``None`` at zero twist.
    """
    if theta == 0:
        return None
    for sense in RotationSense:
        extends = rotation_effect(handedness, sense) is RotationEffect.EXTENDS
        if extends == (theta > 0):
            return sense
    raise AssertionError("unreachable")


def coil_count(design: HsaDesign) -> int:
    """Equivalent coil count: one wide beam per row per symmetry sector."""
    return design.symmetry_order * design.rows


@dataclass(frozen=True)
class CoilSpringParams:
    shear_modulus: float  # N/mm^2
    wire_diameter: float  # mm
    mean_coil_diameter: float  # mm
    coil_count: float

    def __post_init__(self):
        for name in ("shear_modulus", "wire_diameter", "mean_coil_diameter", "coil_count"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")


def coil_spring_constant(p: CoilSpringParams) -> float:
    """Helical spring rate G d^4 / (8 n D^3) in N/mm."""
    return p.shear_modulus * p.wire_diameter**4 / (8.0 * p.coil_count * p.mean_coil_diameter**3)


REST_STIFFNESS_EXPONENT = -1.4


def rest_stiffness_estimate(rows: int, reference_rows: int, reference_k0: float,
                            exponent: float = REST_STIFFNESS_EXPONENT) -> float:
    """Scale a measured untwisted stiffness to another row count.

    Uses the empirical power law ``k0 ~ rows**exponent``.  It is a trend fit:
    individual designs (e.g. 8 rows) can sit well off it.
    """
    if rows < 1 or reference_rows < 1:
        raise InputError("row counts must be >= 1")
    if not reference_k0 > 0:
        raise InputError("reference_k0 must be positive")
    return reference_k0 * (rows / reference_rows) ** exponent
