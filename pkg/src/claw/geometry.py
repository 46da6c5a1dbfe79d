"""Leaf-spring loop geometry: widths, travel limits, and design sweeps.

The wrist's compliant module is built from looped metal tape. Each loop is
approximated as two semicircular arcs of radius ``R`` joined by straight
segments, clamped to the finger unit in the middle and to two rotary joints
at its ends. Three relations drive the design:

* loop width from tape length and joint spacing:
  ``D = (L_total + d) / 2 - pi*R + 2*R``
* usable arc-to-clamp segment: ``L_bc = (L_total - L_clamp) / 2 - L_joint_arm``
* maximum in-plane travel, assuming the tape pulls straight at the limit:
  ``X_max = sqrt(L_bc**2 - 4*R**2) - X_0``

The rated (allowable) travel is 80% of ``X_max`` to keep a safety margin
against damaging the tape or joints.

All lengths are millimeters; everything is double precision with no unit
conversion inside this module. ``X_0`` is treated as the unloaded
X-coordinate of the clamp point in the joint-axis frame (the alternative
reading, measured from the loop center, would shift it by a constant; the
choice only offsets X_max and is configurable).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .errors import InvalidSpecError

# Fraction of X_max rated as safe travel.
ALLOWABLE_FRACTION = 0.8

# Defaults for dimensions that a designer usually fixes from CAD clearances.
# L_clamp and L_joint_arm are plausible values for the reference build, and
# X_0 is picked so the reference spring (R=15, L_total=180) rates 38 mm of
# allowable travel. All three are design-tool defaults, not measured values;
# reports flag them as such.
DEFAULT_L_CLAMP = 20.0
DEFAULT_L_JOINT_ARM = 5.0
DEFAULT_X0 = math.sqrt(75.0**2 - 4 * 15.0**2) - 47.5

#: Spec fields whose defaults are tool choices rather than measured data.
NON_REFERENCE_DEFAULTS = ("L_clamp", "L_joint_arm", "X_0")


@dataclass(frozen=True)
class LeafSpringSpec:
    """Dimensions of one looped leaf spring.

    R: arc radius of the semicircular bends.
    L_total: total tape length between the two joint attachments.
    d: inter-axial distance between the two rotary joints.
    L_clamp: length of the section clamped to the finger unit.
    L_joint_arm: tape length from each joint axis to the start of the arc.
    X_0: unloaded X-coordinate of the clamp point (joint-axis frame).
    """

    R: float
    L_total: float
    d: float
    L_clamp: float = DEFAULT_L_CLAMP
    L_joint_arm: float = DEFAULT_L_JOINT_ARM
    X_0: float = DEFAULT_X0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise InvalidSpecError("spec fields must be finite")
        if self.R <= 0:
            raise InvalidSpecError(f"arc radius must be positive, got R={self.R}")
        for name in ("L_total", "d", "L_clamp", "L_joint_arm", "X_0"):
            if getattr(self, name) < 0:
                raise InvalidSpecError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.L_total <= self.L_clamp + 2 * self.L_joint_arm:
            raise InvalidSpecError(
                "L_total must exceed L_clamp + 2*L_joint_arm "
                f"({self.L_total} <= {self.L_clamp} + 2*{self.L_joint_arm})"
            )
        if self.L_bc <= 2 * self.R:
            raise InvalidSpecError(
                f"arc-to-clamp segment L_bc={self.L_bc:.4f} must exceed 2*R={2 * self.R}"
            )

    @property
    def L_bc(self) -> float:
        """Arc-to-clamp segment length derived from the clamped layout."""
        return (self.L_total - self.L_clamp) / 2 - self.L_joint_arm

    def as_tuple(self) -> tuple[float, ...]:
        return (self.R, self.L_total, self.d, self.L_clamp, self.L_joint_arm, self.X_0)


@dataclass(frozen=True)
class LoopGeometry:
    """Derived loop quantities for a valid spec."""

    D: float        # lateral loop width
    L_bc: float     # semi-arc-to-clamp segment length
    X_max: float    # maximum in-plane displacement
    X_allow: float  # rated displacement, exactly 0.8 * X_max


def compute_loop_width(spec: LeafSpringSpec) -> float:
    """Lateral width of the tape loop for a given spec.

    Raises InvalidSpecError if the width comes out below ``2*R``, which
    would require straight segments of negative length.
    """
    width = (spec.L_total + spec.d) / 2 - math.pi * spec.R + 2 * spec.R
    if width < 2 * spec.R - 1e-12:
        raise InvalidSpecError(
            f"loop width {width:.4f} is below 2*R={2 * spec.R}; loop is impossible"
        )
    return width


def compute_joint_distance(D: float, L_total: float, R: float) -> float:
    """Invert the loop-width relation: joint spacing needed for width ``D``.

    Round-trips through :func:`compute_loop_width` to ``D`` within 1e-9 mm.
    """
    if D <= 0 or L_total <= 0 or R <= 0:
        raise InvalidSpecError("D, L_total, and R must be positive")
    d = 2 * (D - 2 * R + math.pi * R) - L_total
    if d < -1e-12:
        raise InvalidSpecError(
            f"required joint distance d={d:.4f} is negative; widen D or shorten L_total"
        )
    return max(d, 0.0)


def compute_x_max(spec: LeafSpringSpec) -> float:
    """Maximum in-plane travel before the tape pulls straight."""
    L_bc = spec.L_bc
    if L_bc <= 2 * spec.R:
        raise InvalidSpecError(
            f"L_bc={L_bc:.4f} must exceed 2*R={2 * spec.R} for travel to exist"
        )
    x_max = math.sqrt(L_bc * L_bc - 4 * spec.R * spec.R) - spec.X_0
    if x_max <= 0:
        raise InvalidSpecError(f"X_max={x_max:.4f} is not positive; reduce X_0")
    return x_max


def loop_geometry(spec: LeafSpringSpec) -> LoopGeometry:
    """Evaluate all derived loop quantities, validating the spec."""
    x_max = compute_x_max(spec)
    return LoopGeometry(
        D=compute_loop_width(spec),
        L_bc=spec.L_bc,
        X_max=x_max,
        X_allow=ALLOWABLE_FRACTION * x_max,
    )


def _range_values(lo: float, step: float, hi: float) -> list[float]:
    if step <= 0:
        raise InvalidSpecError(f"sweep step must be positive, got {step}")
    if not (math.isfinite(lo) and math.isfinite(step) and math.isfinite(hi)):
        raise InvalidSpecError("sweep range bounds must be finite")
    values = []
    i = 0
    while True:
        v = lo + i * step
        if v > hi + 1e-9:
            break
        values.append(v)
        i += 1
    return values


def sweep_designs(
    ranges: Mapping[str, tuple[float, float, float]],
    max_D: float | None = None,
    min_X_allow: float | None = None,
    base: LeafSpringSpec | None = None,
) -> list[tuple[LeafSpringSpec, LoopGeometry]]:
    """Grid-sweep spring specs and keep the feasible, constraint-satisfying ones.

    ``ranges`` maps LeafSpringSpec field names to (min, step, max). Fields not
    swept are taken from ``base`` (or the reference design if omitted).
    Results are sorted by X_allow descending, ties broken by field values, so
    the ordering is reproducible.
    """
    valid_fields = ("R", "L_total", "d", "L_clamp", "L_joint_arm", "X_0")
    for name in ranges:
        if name not in valid_fields:
            raise InvalidSpecError(f"unknown sweep field {name!r}")
    if base is None:
        base = reference_spec()
    names = [f for f in valid_fields if f in ranges]
    grids = [_range_values(*ranges[name]) for name in names]

    results: list[tuple[LeafSpringSpec, LoopGeometry]] = []
    for combo in itertools.product(*grids):
        try:
            spec = replace(base, **dict(zip(names, combo)))
            geo = loop_geometry(spec)
        except InvalidSpecError:
            continue
        if max_D is not None and geo.D > max_D + 1e-9:
            continue
        if min_X_allow is not None and geo.X_allow < min_X_allow - 1e-9:
            continue
        results.append((spec, geo))
    results.sort(key=lambda sg: (-sg[1].X_allow,) + sg[0].as_tuple())
    return results


def reference_spec() -> LeafSpringSpec:
    """The reference design point: R=15, L_total=180, joint spacing set so D=90."""
    d = compute_joint_distance(90.0, 180.0, 15.0)
    return LeafSpringSpec(R=15.0, L_total=180.0, d=d)


def spec_csv_row(spec: LeafSpringSpec, geo: LoopGeometry) -> dict[str, float]:
    """One design report row, keyed by the CSV column names."""
    return {
        "R_mm": spec.R,
        "L_total_mm": spec.L_total,
        "d_mm": spec.d,
        "L_clamp_mm": spec.L_clamp,
        "L_joint_arm_mm": spec.L_joint_arm,
        "X0_mm": spec.X_0,
        "D_mm": geo.D,
        "L_bc_mm": geo.L_bc,
        "X_max_mm": geo.X_max,
        "X_allow_mm": geo.X_allow,
    }


DESIGN_CSV_COLUMNS: tuple[str, ...] = (
    "R_mm", "L_total_mm", "d_mm", "L_clamp_mm", "L_joint_arm_mm",
    "X0_mm", "D_mm", "L_bc_mm", "X_max_mm", "X_allow_mm",
)


def _iter_csv_rows(
    entries: Iterable[tuple[LeafSpringSpec, LoopGeometry]],
) -> Iterable[dict[str, float]]:
    for spec, geo in entries:
        yield spec_csv_row(spec, geo)
