"""From raw cycling-test logs to fitted spring parameters.

Pipeline: :func:`segment_cycles` splits a log at displacement reversals,
:func:`cycle_properties` extracts rest length, stiffness, holding torque and
blocked force from each cycle, :func:`aggregate` takes per-angle medians
(dropping the first, hysteretic cycle) and :func:`fit_spring_model` fits the
four model families by ordinary least squares.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .design_space import TrajectoryPoint
from .errors import (
    DegenerateDesignMatrix,
    InputError,
    InsufficientCycles,
    LengthMismatch,
    NoCyclesFound,
    NoForceMinimum,
    NonMonotoneTime,
    NonPositiveInput,
)
from .spring_model import SpringFit

NOMINAL_SAMPLE_RATE = 50.0  # Hz
NOMINAL_TEST_SPEED = 20.0  # mm/s
THETA_DECIMALS = 6


@dataclass(frozen=True, eq=False)
class CycleTestRecord:
    """Time series from a universal testing machine with a torque cell."""

    time: np.ndarray  # s
    displacement: np.ndarray  # mm
    force: np.ndarray  # N
    torque: np.ndarray  # N*mm
    theta: np.ndarray  # commanded twist, deg
    sample_rate: float | None = None  # Hz; inferred from time when None
    design: str | None = None
    test_speed: float = NOMINAL_TEST_SPEED  # mm/s
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = {}
        for name in ("time", "displacement", "force", "torque", "theta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise InputError(f"{name} must be one-dimensional")
            cols[name] = arr
            object.__setattr__(self, name, arr)
        n = len(self.time)
        if any(len(a) != n for a in cols.values()):
            raise LengthMismatch("all channels must have the same length")
        if n and not np.all(np.isfinite(self.time)):
            raise InputError("time contains non-finite values")
        if n > 1 and np.any(np.diff(self.time) <= 0):
            raise NonMonotoneTime("time must be strictly increasing")
        if self.sample_rate is None:
            rate = 1.0 / float(np.median(np.diff(self.time))) if n > 1 else NOMINAL_SAMPLE_RATE
            object.__setattr__(self, "sample_rate", rate)
        if not self.sample_rate > 0:
            raise InputError("sample_rate must be positive")

    def __len__(self):
        return len(self.time)

    def __getitem__(self, sl: slice) -> "CycleTestRecord":
        if not isinstance(sl, slice):
            raise TypeError("records can only be sliced")
        return replace(
            self,
            time=self.time[sl], displacement=self.displacement[sl], force=self.force[sl],
            torque=self.torque[sl], theta=self.theta[sl],
        )

    def __eq__(self, other):
        if not isinstance(other, CycleTestRecord):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("time", "displacement", "force", "torque", "theta")
        )

    @classmethod
    def concatenate(cls, records: Sequence["CycleTestRecord"]) -> "CycleTestRecord":
        if not records:
            raise InputError("nothing to concatenate")
        first = records[0]
        return replace(
            first,
            **{
                n: np.concatenate([getattr(r, n) for r in records])
                for n in ("time", "displacement", "force", "torque", "theta")
            },
        )


def cycle_theta(cycle: CycleTestRecord) -> float:
    """Commanded twist of a cycle (median of the theta channel)."""
    return round(float(np.median(cycle.theta)), THETA_DECIMALS)


def _turning_points(x, band):
    """Alternating (index, kind) turning points, kind +1 peak / -1 trough.

    A reversal is only confirmed once the signal retreats from the running
    extreme by more than ``band``; jitter inside the band is ignored.
    """
    turns = []
    direction = 0
    hi = lo = 0
    for i in range(1, len(x)):
        if x[i] > x[hi]:
            hi = i
        if x[i] < x[lo]:
            lo = i
        if direction == 0:
            if x[i] - x[lo] > band:
                turns.append((lo, -1))
                direction, hi = 1, i
            elif x[hi] - x[i] > band:
                turns.append((hi, 1))
                direction, lo = -1, i
        elif direction > 0:
            if x[hi] - x[i] > band:
                turns.append((hi, 1))
                direction, lo = -1, i
        elif x[i] - x[lo] > band:
            turns.append((lo, -1))
            direction, hi = 1, i
    return turns, direction, (lo if direction < 0 else hi)


def segment_cycles(record: CycleTestRecord, band_fraction: float = 0.01,
                   endpoint_fraction: float = 0.1) -> list[CycleTestRecord]:
    """Split a cycling log into complete cycles.

    Cycles run from one reversal at a cycling-range endpoint to the next
    reversal at the same endpoint (trough to trough when the log starts by
    extending).  Leading and trailing partial cycles are discarded.  Slices
    are half-open, so concatenating the cycles of a log made only of full
    cycles reproduces it.
    """
    if len(record) < 3:
        raise NoCyclesFound("record too short to contain a cycle")
    x = record.displacement
    span = float(np.ptp(x))
    if span == 0:
        raise NoCyclesFound("displacement never changes")
    band = band_fraction * span
    turns, direction, pending = _turning_points(x, band)
    if not turns:
        raise NoCyclesFound("no displacement reversal found")
    # Work in the frame where a cycle starts with an extension.
    sign = -turns[0][1]
    xs = sign * x
    top, bottom = xs.max(), xs.min()
    # the endpoint test cannot be finer than one sample step
    tol = max(endpoint_fraction * span, 1.5 * float(np.median(np.abs(np.diff(x)))))
    starts = [i for i, kind in turns if kind * sign == -1 and xs[i] - bottom <= tol]
    peaks = [i for i, kind in turns if kind * sign == 1 and top - xs[i] <= tol]
    # A log ending on the return stroke closes its last cycle at the end.
    if direction == -sign and pending == len(x) - 1 and xs[-1] - bottom <= tol:
        starts.append(len(x))
    cycles = []
    for a, b in zip(starts, starts[1:]):
        if any(a < p < b for p in peaks):
            cycles.append(record[a:b])
    if not cycles:
        raise NoCyclesFound("no complete cycle between the cycling-range endpoints")
    return cycles


@dataclass(frozen=True)
class AggregatedPoint:
    theta: float
    median: float
    min: float
    max: float
    n_cycles: int

    def __post_init__(self):
        if self.n_cycles < 1:
            raise InputError("n_cycles must be >= 1")
        if not self.min <= self.median <= self.max:
            raise InputError("need min <= median <= max")


def aggregate(cycles: Sequence[CycleTestRecord],
              measure: Callable[[CycleTestRecord], float] | Sequence[float],
              drop_first: bool = True,
              at_thetas: Sequence[float] | None = None) -> list[AggregatedPoint]:
    """Per-angle median, minimum and maximum of a per-cycle quantity.

    ``measure`` is either a function of a cycle or precomputed values aligned
    with ``cycles``.  Cycles are grouped by commanded twist and ordered by
    start time; with ``drop_first`` the earliest cycle of each group is
    discarded.  Even counts use the usual mean-of-middles median.
    """
    if callable(measure):
        values = [float(measure(c)) for c in cycles]
    else:
        values = [float(v) for v in measure]
        if len(values) != len(cycles):
            raise LengthMismatch("one measured value per cycle is required")
    groups: dict[float, list[tuple[float, float]]] = {}
    for cyc, val in zip(cycles, values):
        groups.setdefault(cycle_theta(cyc), []).append((float(cyc.time[0]), val))
    if at_thetas is None:
        wanted = sorted(groups)
    else:
        wanted = [round(float(t), THETA_DECIMALS) for t in at_thetas]
    out = []
    for th in wanted:
        group = sorted(groups.get(th, []))
        if drop_first:
            group = group[1:]
        if not group:
            need = 2 if drop_first else 1
            raise InsufficientCycles(f"theta={th:g}: need at least {need} cycles")
        vals = np.array([v for _, v in group])
        out.append(AggregatedPoint(th, float(np.median(vals)), float(vals.min()),
                                   float(vals.max()), len(vals)))
    return out


def r_squared(observed, predicted) -> float:
    """Coefficient of determination about the observed mean.

    Constant observations give 1 for a perfect prediction and 0 otherwise.
    """
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if obs.shape != pred.shape or obs.ndim != 1:
        raise LengthMismatch("observed and predicted must be equal-length sequences")
    if obs.size == 0:
        raise LengthMismatch("need at least one observation")
    ss_res = float(np.sum((obs - pred) ** 2))
    ss_tot = float(np.sum((obs - obs.mean()) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1.0 - ss_res / ss_tot


class TorqueOrder(Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


def _lstsq(columns, y, label, min_distinct, theta):
    if len(np.unique(theta)) < min_distinct:
        raise DegenerateDesignMatrix(f"{label}: need at least {min_distinct} distinct angles")
    X = np.column_stack(columns)
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise DegenerateDesignMatrix(f"{label}: design matrix is rank deficient")
    return coef, X @ coef


def _series(pairs, label):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) == 0:
        raise InputError(f"{label}: expected a non-empty list of (theta, value) pairs")
    return arr[:, 0], arr[:, 1]


def fit_spring_model(blocked, torque, stiffness, lengths,
                     torque_order: TorqueOrder = TorqueOrder.LINEAR,
                     design=None, name: str | None = None) -> SpringFit:
    """Least-squares fit of the four programmable-spring families.

    Blocked force and torque are fitted through the origin (both vanish
    without twist); stiffness and length are affine.  R^2 values are
    clipped to [0, 1] since through-origin fits can score below zero.
    """
    th_b, fb = _series(blocked, "blocked force")
    th_t, tq = _series(torque, "holding torque")
    th_k, kk = _series(stiffness, "stiffness")
    th_l, ll = _series(lengths, "length")

    (a, b), fb_hat = _lstsq([th_b**2, th_b], fb, "blocked force", 3, th_b)
    if torque_order is TorqueOrder.QUADRATIC:
        (d, c), tq_hat = _lstsq([th_t**2, th_t], tq, "holding torque", 3, th_t)
    else:
        (c,), tq_hat = _lstsq([th_t], tq, "holding torque", 2, th_t)
        d = 0.0
    (ck, k0), kk_hat = _lstsq([th_k, np.ones_like(th_k)], kk, "stiffness", 3, th_k)
    (cl, l0), ll_hat = _lstsq([th_l, np.ones_like(th_l)], ll, "length", 3, th_l)

    def r2(o, p):
        return min(1.0, max(0.0, r_squared(o, p)))

    thetas = np.concatenate([th_b, th_t, th_k, th_l])
    return SpringFit(
        force_quad=float(a), force_lin=float(b),
        torque_lin=float(c), torque_quad=float(d),
        stiffness_slope=float(ck), rest_stiffness=float(k0),
        length_slope=float(cl), rest_length=float(l0),
        theta_min=float(thetas.min()), theta_max=float(thetas.max()),
        r2_blocked=r2(fb, fb_hat), r2_torque=r2(tq, tq_hat),
        r2_stiffness=r2(kk, kk_hat), r2_length=r2(ll, ll_hat),
        design=design, name=name,
    )


@dataclass(frozen=True)
class CycleProperties:
    theta: float
    zero_force_offset: float  # displacement where the force vanishes, mm
    stiffness: float  # N/mm
    torque: float  # N*mm at the zero-force offset
    blocked_force: float  # N at the rest offset (nan when unknown)


def _line(x, y):
    if np.ptp(x) == 0:
        raise DegenerateDesignMatrix("displacement does not vary over the fitting window")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def cycle_properties(cycle: CycleTestRecord, rest_offset: float | None = None,
                     window: float = 4.0) -> CycleProperties:
    """Spring properties of one cycle at fixed twist.

    Both strokes of the cycle are used.  The sample with the smallest
    |force| marks the zero-force point.  Stiffness is the least-squares
    slope over ``window`` mm beyond it (on the side away from the rest
    offset); the zero-force offset is where that line crosses zero and the
    holding torque is read there.  The blocked force comes from a line through the zero-force point
    fitted to the samples on the rest-offset side, evaluated at
    ``rest_offset``.
    """
    x, f, tq = cycle.displacement, cycle.force, cycle.torque
    if len(x) < 3:
        raise DegenerateDesignMatrix("cycle has fewer than three samples")
    i0 = int(np.argmin(np.abs(f)))
    outward = rest_offset is None or rest_offset <= x[i0]
    if outward:
        k_mask = (x > x[i0]) & (x <= x[i0] + window)
        rest_mask = x < x[i0]
    else:
        k_mask = (x < x[i0]) & (x >= x[i0] - window)
        rest_mask = x > x[i0]
    if k_mask.sum() < 2:
        raise DegenerateDesignMatrix("fewer than two samples in the stiffness window")
    k, c = _line(x[k_mask], f[k_mask])
    if k == 0:
        raise DegenerateDesignMatrix("zero stiffness; no zero-force point")
    x_zero = -c / k
    ts, tc = _line(x[k_mask], tq[k_mask])
    torque = ts * x_zero + tc
    if rest_offset is None:
        blocked = float("nan")
    elif rest_mask.any():
        # Line through the zero-force point fitted to the rest-side samples.
        dx = x[rest_mask] - x_zero
        slope = float(dx @ f[rest_mask] / (dx @ dx))
        blocked = slope * (rest_offset - x_zero)
    else:
        blocked = k * (rest_offset - x_zero)
    return CycleProperties(cycle_theta(cycle), float(x_zero), k, float(torque), float(blocked))


def fit_record(record: CycleTestRecord, printed_length: float,
               torque_order: TorqueOrder = TorqueOrder.LINEAR, drop_first: bool = True,
               window: float = 4.0, design=None, name: str | None = None) -> SpringFit:
    """Run segmentation, per-cycle extraction, aggregation and fitting.

    The rest offset (length held for blocked-force readings) is the median
    zero-force offset of the untwisted cycles, so the log must contain a
    ``theta = 0`` step.
    """
    cycles = segment_cycles(record)
    first = [cycle_properties(c, None, window) for c in cycles]
    rest_cycles = [(c, p) for c, p in zip(cycles, first) if p.theta == 0]
    if not rest_cycles:
        raise InputError("log has no theta = 0 cycles; cannot locate the rest length")
    rest = aggregate([c for c, _ in rest_cycles], [p.zero_force_offset for _, p in rest_cycles],
                     drop_first=drop_first)[0].median
    props = [cycle_properties(c, rest, window) for c in cycles]

    def table(attr, offset=0.0):
        pts = aggregate(cycles, [getattr(p, attr) for p in props], drop_first=drop_first)
        return [(p.theta, p.median + offset) for p in pts]

    return fit_spring_model(
        blocked=table("blocked_force"),
        torque=table("torque"),
        stiffness=table("stiffness"),
        lengths=table("zero_force_offset", printed_length),
        torque_order=torque_order, design=design, name=name or record.design,
    )


def _dwells(record: CycleTestRecord):
    """Split a record into runs of constant commanded twist."""
    th = np.round(record.theta, THETA_DECIMALS)
    edges = np.flatnonzero(np.diff(th) != 0) + 1
    bounds = np.concatenate([[0], edges, [len(th)]])
    return [(float(th[a]), record[a:b]) for a, b in zip(bounds, bounds[1:])]


def _zero_force_point(seg: CycleTestRecord, theta: float) -> float:
    f, x = seg.force, seg.displacement
    i = int(np.argmin(np.abs(f)))
    if i == 0 or i == len(f) - 1:
        raise NoForceMinimum(f"theta={theta:g}: force has no interior minimum in its dwell")
    for j in (i - 1, i + 1):
        if f[i] != 0 and np.sign(f[j]) == -np.sign(f[i]):
            return float(x[i] + (x[j] - x[i]) * f[i] / (f[i] - f[j]))
    return float(x[i])


def zero_force_displacement(record: CycleTestRecord, trajectory_point: TrajectoryPoint) -> float:
    """Per-step zero-force displacement from a stepped-rotation record.

    Each dwell (run of constant twist) is jogged through its zero-force
    point.  Closed designs average the increments between consecutive
    steps, semi-open designs take the least-squares slope against the step
    index, and open designs divide the offset at the most-twisted step by
    the number of steps back to rest.
    """
    dwells = _dwells(record)
    if len(dwells) < 2:
        raise InputError("need at least two twist steps")
    thetas = np.array([th for th, _ in dwells])
    zeros = np.array([_zero_force_point(seg, th) for th, seg in dwells])
    if trajectory_point is TrajectoryPoint.CLOSED:
        return float(abs(np.mean(np.diff(zeros))))
    if trajectory_point is TrajectoryPoint.SEMI_OPEN:
        slope, _ = np.polyfit(np.arange(len(zeros)), zeros, 1)
        return float(abs(slope))
    i_rest = int(np.argmin(np.abs(thetas)))
    i_ext = int(np.argmax(np.abs(thetas - thetas[i_rest])))
    step = float(np.median(np.abs(np.diff(thetas))))
    if step == 0:
        raise InputError("twist steps are not distinct")
    n_steps = round(abs(thetas[i_ext] - thetas[i_rest]) / step)
    return float(abs(zeros[i_ext] - zeros[i_rest]) / n_steps)


def local_spring_constant(extension_record: CycleTestRecord, window: float | None = None) -> float:
    """Least-squares force/displacement slope of an extension starting at L.

    ``window`` limits the fit to the first ``window`` mm of travel.
    """
    x = extension_record.displacement
    f = extension_record.force
    if window is not None:
        keep = np.abs(x - x[0]) <= window + 1e-12
        x, f = x[keep], f[keep]
    return _line(x, f)[0]


@dataclass(frozen=True)
class PowerLawFit:
    coefficient: float
    exponent: float
    r_squared: float  # in log-log space

    def __call__(self, x):
        return self.coefficient * np.asarray(x, dtype=float) ** self.exponent


def fit_power_law(pairs) -> PowerLawFit:
    """Fit ``y = c x**p`` by least squares in log-log space."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("expected (x, y) pairs")
    if np.any(arr <= 0):
        raise NonPositiveInput("power-law data must be strictly positive")
    lx, ly = np.log(arr[:, 0]), np.log(arr[:, 1])
    if len(arr) < 2 or np.ptp(lx) == 0:
        raise DegenerateDesignMatrix("need at least two distinct x values")
    p, lc = np.polyfit(lx, ly, 1)
    return PowerLawFit(float(np.exp(lc)), float(p), r_squared(ly, p * lx + lc))
