"""Nonlinear time-varying object model used as the controlled plant.

The equivalent object (grasped object plus elastic fingertip in series) is
described by a generalized stiffness surface k(t, F) on a rectangular grid
with bilinear interpolation, plus a zero-force drift curve C'(t).  Deformation
under force F at time t is

    x(t, F) = integral_0^F dF' / k(t, F')  +  C'(t)

Because k is piecewise linear in F at fixed t, the integral has an exact
per-cell closed form (log of the stiffness ratio over the stiffness slope),
which this module uses for both the forward map and its inverse.  That keeps
the closed-loop simulator fast and makes force/displacement round trips exact
to floating-point rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np


class DomainError(ValueError):
    """Query outside the plant's defined (t, F) or (t, x) domain."""


class SaturationError(RuntimeError):
    """Requested displacement exceeds the deformation at maximum force."""


@dataclass(frozen=True)
class ModelBounds:
    """Bounds parameterizing the object-model assumptions.

    All rates are per control step (period T), not per second.  ``k_drift_step``
    must stay below 1 for the relative-drift bound to be meaningful.
    """

    k_min: float = 0.05          # smallest admissible stiffness (N/mm)
    k_max: float = 8.0           # fingertip-limited stiffness ceiling k_m (N/mm)
    f_max: float = 12.0          # gripper force limit F_m (N)
    force_step: float = 0.5      # per-step |dF| bound (N)
    target_step: float = 0.5     # per-step |dF_d| bound (N)
    drift_step: float = 0.05     # per-step zero-force drift bound (mm)
    drift_max: float = 10.0      # total zero-force drift bound (mm)
    k_drift_step: float = 0.01   # per-step relative stiffness drift bound
    k_drift_total: float = 0.5   # total relative stiffness drift bound
    const_force_drift: float = 0.01  # per-step constant-force drift bound (mm)
    velocity_err: float = 0.05   # velocity tracking error bound (mm/s)

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ValueError(f"ModelBounds.{name} must be positive")
        if self.k_drift_step >= 1.0:
            raise ValueError("k_drift_step must be < 1")
        if self.k_min >= self.k_max:
            raise ValueError("k_min must be < k_max")


@dataclass(frozen=True)
class StiffnessField:
    """Generalized stiffness surface k(t, F) on a (time x force) grid.

    ``values[i, j]`` is the stiffness at (grid_t[i], grid_F[j]); queries are
    bilinearly interpolated.  The constructor checks shapes and grid
    monotonicity only; semantic bounds (positivity, drift rates) are the
    job of :func:`validate_assumptions` so that invalid fields can still be
    constructed and flagged.
    """

    grid_t: np.ndarray
    grid_F: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid_t", np.asarray(self.grid_t, dtype=float))
        object.__setattr__(self, "grid_F", np.asarray(self.grid_F, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (self.grid_t.size, self.grid_F.size):
            raise ValueError("values shape must be (len(grid_t), len(grid_F))")
        if self.grid_t.size < 2 or self.grid_F.size < 2:
            raise ValueError("grids need at least two nodes")
        if np.any(np.diff(self.grid_t) <= 0) or np.any(np.diff(self.grid_F) <= 0):
            raise ValueError("grids must be strictly increasing")
        if self.grid_F[0] != 0.0:
            raise ValueError("grid_F must start at zero force")

    @property
    def f_limit(self) -> float:
        return float(self.grid_F[-1])

    @classmethod
    def constant(cls, k: float, duration: float = 20.0, f_max: float = 12.0,
                 nodes: int = 64) -> "StiffnessField":
        """Uniform field k(t, F) = k, handy for ideal-spring plants."""
        gt = np.linspace(0.0, duration, nodes)
        gf = np.linspace(0.0, f_max, nodes)
        return cls(gt, gf, np.full((nodes, nodes), float(k)))


@dataclass(frozen=True)
class DriftCurve:
    """Zero-force drift C'(t), linearly interpolated between time nodes."""

    grid_t: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid_t", np.asarray(self.grid_t, dtype=float))
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.grid_t.shape != self.samples.shape or self.grid_t.ndim != 1:
            raise ValueError("grid_t and samples must be matching 1-D arrays")
        if np.any(np.diff(self.grid_t) <= 0):
            raise ValueError("grid_t must be strictly increasing")
        if self.samples[0] != 0.0:
            raise ValueError("zero-force drift must start at zero (contact calibration)")

    @classmethod
    def zero(cls, duration: float = 20.0, nodes: int = 64) -> "DriftCurve":
        gt = np.linspace(0.0, duration, nodes)
        return cls(gt, np.zeros(nodes))

    def value(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        _check_time_range(t, self.grid_t, "drift curve")
        out = np.interp(t, self.grid_t, self.samples)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PlantState:
    """Instantaneous operating point of the plant."""

    t: float
    F: float
    x: float


def _check_time_range(t, grid_t, what, slack: float = 1e-9):
    tmin = float(np.min(t)) if np.ndim(t) else float(t)
    tmax = float(np.max(t)) if np.ndim(t) else float(t)
    if tmin < grid_t[0] - slack or tmax > grid_t[-1] + slack:
        raise DomainError(f"time {tmin if tmin < grid_t[0] else tmax} outside "
                          f"{what} range [{grid_t[0]}, {grid_t[-1]}]")


def _row_indices(field: StiffnessField, t: np.ndarray):
    """Time-cell index and interpolation weight for each query time."""
    _check_time_range(t, field.grid_t, "stiffness field")
    i = np.clip(np.searchsorted(field.grid_t, t, side="right") - 1,
                0, field.grid_t.size - 2)
    dt = field.grid_t[i + 1] - field.grid_t[i]
    alpha = np.clip((t - field.grid_t[i]) / dt, 0.0, 1.0)
    return i, alpha


def _blended_rows(field: StiffnessField, t: np.ndarray) -> np.ndarray:
    """Stiffness over the force grid at each query time: shape (len(t), nF)."""
    i, alpha = _row_indices(field, t)
    a = alpha[:, None]
    return (1.0 - a) * field.values[i, :] + a * field.values[i + 1, :]


def _cell_integrals(rows: np.ndarray, grid_F: np.ndarray) -> np.ndarray:
    """Exact integral of 1/k across each force cell for each row.

    Within a cell k is linear in F, so the integral is
    w * log(k_r/k_l) / (k_r - k_l), evaluated stably as (w/k_l) * log1p(r)/r
    with r = k_r/k_l - 1 and a series fallback near r = 0.
    """
    k_l = rows[:, :-1]
    k_r = rows[:, 1:]
    w = np.diff(grid_F)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = k_r / k_l - 1.0
        ratio = np.log1p(r) / r
    small = np.abs(r) < 1e-8
    if np.any(small):
        ratio = np.where(small, 1.0 - r / 2.0, ratio)
    return w / k_l * ratio


def _partial_cell(rows, grid_F, F):
    """Integral of 1/k from the cell's left node to F (one query per row)."""
    j = np.clip(np.searchsorted(grid_F, F, side="right") - 1, 0, grid_F.size - 2)
    rows_idx = np.arange(rows.shape[0])
    k_l = rows[rows_idx, j]
    k_rr = rows[rows_idx, j + 1]
    w = grid_F[j + 1] - grid_F[j]
    u = F - grid_F[j]
    b = (k_rr - k_l) / w
    with np.errstate(divide="ignore", invalid="ignore"):
        r = b * u / k_l
        ratio = np.log1p(r) / r
    small = np.abs(r) < 1e-8
    if np.any(small):
        ratio = np.where(small, 1.0 - r / 2.0, ratio)
    return j, u / k_l * ratio


def deformation_integral_many(field: StiffnessField, t, F) -> np.ndarray:
    """integral_0^F dF'/k(t, F') for paired arrays of times and forces."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    F = np.atleast_1d(np.asarray(F, dtype=float))
    if np.any(F < -1e-12) or np.any(F > field.f_limit + 1e-9):
        raise DomainError("force outside [0, F_max]")
    F = np.clip(F, 0.0, field.f_limit)
    rows = _blended_rows(field, t)
    cum = np.concatenate(
        [np.zeros((rows.shape[0], 1)),
         np.cumsum(_cell_integrals(rows, field.grid_F), axis=1)], axis=1)
    j, part = _partial_cell(rows, field.grid_F, F)
    return cum[np.arange(rows.shape[0]), j] + part


def deformation_many(field: StiffnessField, drift: DriftCurve, t, F) -> np.ndarray:
    """Vectorized :func:`deformation` over paired (t, F) arrays."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return deformation_integral_many(field, t, F) + drift.value(t)


def deformation(field: StiffnessField, drift: DriftCurve, t: float, F: float) -> float:
    """Displacement of the plant at time t under force F (mm).

    Exact integral of the reciprocal interpolated stiffness plus the
    zero-force drift; strictly increasing in F whenever the field is positive.
    """
    return float(deformation_many(field, drift, [t], [F])[0])


def stiffness_at_many(field: StiffnessField, t, F) -> np.ndarray:
    """Bilinear stiffness lookup for paired (t, F) arrays."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    F = np.atleast_1d(np.asarray(F, dtype=float))
    if np.any(F < -1e-12) or np.any(F > field.f_limit + 1e-9):
        raise DomainError("force outside [0, F_max]")
    F = np.clip(F, 0.0, field.f_limit)
    rows = _blended_rows(field, t)
    j = np.clip(np.searchsorted(field.grid_F, F, side="right") - 1,
                0, field.grid_F.size - 2)
    idx = np.arange(rows.shape[0])
    w = field.grid_F[j + 1] - field.grid_F[j]
    beta = (F - field.grid_F[j]) / w
    return (1.0 - beta) * rows[idx, j] + beta * rows[idx, j + 1]


def stiffness_at(field: StiffnessField, t: float, F: float) -> float:
    """Generalized stiffness k(t, F) in N/mm by bilinear interpolation."""
    return float(stiffness_at_many(field, [t], [F])[0])


def force_from_displacement(field: StiffnessField, drift: DriftCurve,
                            t: float, x: float) -> tuple[float, bool]:
    """Invert the deformation map: force F such that x(t, F) = x.

    Returns ``(F, separated)``.  If x is below the zero-force drift the
    gripper has lost contact and (0, True) is returned; grippers cannot pull.
    Raises :class:`SaturationError` when x exceeds the deformation at F_max.

    The inverse is computed in closed form inside the bracketing force cell
    (exponential of the integral remainder), so round trips with
    :func:`deformation` agree to floating-point rounding.
    """
    c = drift.value(t)
    y = x - c
    if y < 0.0:
        return 0.0, True
    rows = _blended_rows(field, np.asarray([t], dtype=float))
    cells = _cell_integrals(rows, field.grid_F)[0]
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    total = cum[-1]
    if not math.isfinite(total):
        raise DomainError("stiffness field is not positive over [0, F_max]")
    if y > total * (1.0 + 1e-12) + 1e-15:
        raise SaturationError(
            f"displacement {x} mm exceeds deformation at maximum force "
            f"({total + c} mm at t={t})")
    y = min(y, total)
    j = int(np.clip(np.searchsorted(cum, y, side="right") - 1, 0, cells.size - 1))
    rem = y - cum[j]
    k_l = rows[0, j]
    w = field.grid_F[j + 1] - field.grid_F[j]
    b = (rows[0, j + 1] - k_l) / w
    if abs(b) * w < 1e-12 * k_l:
        u = rem * k_l
    else:
        u = k_l * math.expm1(b * rem) / b
    F = field.grid_F[j] + min(max(u, 0.0), w)
    return float(F), False


@dataclass(frozen=True)
class AssumptionCheck:
    """Outcome of one model-assumption check."""

    name: str
    passed: bool
    bound: float
    worst: float     # worst observed value against the bound
    margin: float    # bound minus worst; positive means pass


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"{c.name:22s} {status}  worst={c.worst:.6g} "
                         f"bound={c.bound:.6g} margin={c.margin:.6g}")
        return "\n".join(lines)


def _check(name, worst, bound) -> AssumptionCheck:
    worst = float(worst)
    if not math.isfinite(worst):
        return AssumptionCheck(name, False, float(bound), worst, -math.inf)
    margin = float(bound) - worst
    return AssumptionCheck(name, margin > 0.0, float(bound), worst, margin)


def validate_assumptions(field: StiffnessField, drift: DriftCurve,
                         profile, bounds: ModelBounds) -> ValidationReport:
    """Check a (field, drift, force profile) triple against the object model.

    Evaluates, on the profile's control-period lattice: stiffness positivity
    and ceiling, force positivity/ceiling and per-step rate, zero-force drift
    rate and magnitude, per-step and total relative stiffness drift at fixed
    force, and the per-step constant-force drift obtained by integrating the
    change of 1/k up to the current force.  Always returns a report; it never
    raises on a failing model.
    """
    F = np.asarray(profile.samples, dtype=float)
    times = profile.times()
    checks = []

    # Positive bounded generalized stiffness: grid extrema bound the bilinear
    # interpolant exactly.
    vmin = float(np.min(field.values))
    vmax = float(np.max(field.values))
    checks.append(AssumptionCheck("stiffness_bounds",
                                  vmin > 0.0 and vmax < bounds.k_max,
                                  bounds.k_max, vmax,
                                  min(vmin, bounds.k_max - vmax)))

    # Positive continuous bounded grasping force (F(0) = 0 contact is allowed).
    fmin = float(np.min(F[1:])) if F.size > 1 else float(F[0])
    fmax = float(np.max(F))
    checks.append(AssumptionCheck("force_bounds",
                                  fmin > 0.0 and fmax < bounds.f_max,
                                  bounds.f_max, fmax,
                                  min(fmin, bounds.f_max - fmax)))
    checks.append(_check("force_rate", np.max(np.abs(np.diff(F))) if F.size > 1
                         else 0.0, bounds.force_step))

    # Slow and bounded zero-force drift.
    c = drift.value(times)
    checks.append(_check("drift_rate", np.max(np.abs(np.diff(c))) if c.size > 1
                         else 0.0, bounds.drift_step))
    checks.append(_check("drift_magnitude", np.max(np.abs(c)), bounds.drift_max))

    # Slow and bounded stiffness drift, probed at every force-grid node.
    rows = _blended_rows(field, times)
    with np.errstate(divide="ignore", invalid="ignore"):
        step_ratio = np.abs(np.diff(rows, axis=0) / rows[:-1, :])
        total_ratio = np.abs(rows - rows[0:1, :]) / np.abs(rows[0:1, :])
    checks.append(_check("stiffness_drift_step",
                         np.max(step_ratio) if step_ratio.size else 0.0,
                         bounds.k_drift_step))
    checks.append(_check("stiffness_drift_total", np.max(total_ratio),
                         bounds.k_drift_total))

    # Slow constant-force drift: per-step change of the compliance integral
    # up to the held force.
    if times.size > 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            xi_now = deformation_integral_many(field, times[:-1], F[:-1])
            xi_next = deformation_integral_many(field, times[1:], F[:-1])
        eps_kf = np.max(np.abs(xi_next - xi_now))
    else:
        eps_kf = 0.0
    checks.append(_check("const_force_drift", eps_kf, bounds.const_force_drift))

    return ValidationReport(tuple(checks))
