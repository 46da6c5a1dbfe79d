import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claw.errors import InvalidSpecError
from claw.geometry import (
    ALLOWABLE_FRACTION,
    LeafSpringSpec,
    compute_joint_distance,
    compute_loop_width,
    compute_x_max,
    loop_geometry,
    reference_spec,
    sweep_designs,
)


def spec_with_lbc(L_bc: float, R: float, X_0: float, d: float = 40.0) -> LeafSpringSpec:
    """Build a spec realizing a chosen arc-to-clamp segment length."""
    L_clamp, L_joint_arm = 20.0, 5.0
    L_total = 2 * (L_bc + L_joint_arm) + L_clamp
    return LeafSpringSpec(R=R, L_total=L_total, d=d, L_clamp=L_clamp,
                          L_joint_arm=L_joint_arm, X_0=X_0)


class TestLoopWidth:
    def test_reference_design_point(self):
        # Inverting the width relation at the reference point gives the
        # joint spacing, which forward-evaluates back to a 90 mm loop.
        d = compute_joint_distance(90.0, 180.0, 15.0)
        assert d == pytest.approx(34.2478, abs=1e-3)
        spec = LeafSpringSpec(R=15.0, L_total=180.0, d=d)
        assert compute_loop_width(spec) == pytest.approx(90.0, abs=1e-9)

    def test_circular_loop_limit(self):
        # When tape length plus joint spacing equals one circumference the
        # straight segments vanish and the loop width collapses to 2R.
        R = 15.0
        spec = spec_with_lbc(45.0, R, 0.0, d=0.0)
        L_total = spec.L_total
        d = 2 * math.pi * R - L_total
        if d >= 0:
            spec2 = LeafSpringSpec(R=R, L_total=L_total, d=d,
                                   L_clamp=spec.L_clamp, L_joint_arm=spec.L_joint_arm,
                                   X_0=0.0)
            assert compute_loop_width(spec2) == pytest.approx(2 * R, abs=1e-9)
        assert compute_joint_distance(2 * R, 2 * math.pi * R, R) == pytest.approx(0.0, abs=1e-9)

    def test_direct_arithmetic(self):
        spec = LeafSpringSpec(R=20.0, L_total=200.0, d=40.0, L_clamp=20.0,
                              L_joint_arm=5.0, X_0=10.0)
        expected = 120.0 - 20.0 * math.pi + 40.0
        assert compute_loop_width(spec) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(97.168, abs=1e-3)

    def test_joint_distance_round_trip_of_example(self):
        d = compute_joint_distance(97.16814692820414, 200.0, 20.0)
        assert d == pytest.approx(40.0, abs=1e-9)

    def test_impossible_loop_rejected(self):
        spec = spec_with_lbc(45.0, 15.0, 0.0, d=0.0)
        # Shrink total length until the width would dip below 2R.
        with pytest.raises(InvalidSpecError):
            compute_loop_width(LeafSpringSpec(R=30.0, L_total=120.0, d=0.0,
                                              L_clamp=10.0, L_joint_arm=2.0, X_0=0.0))

    def test_negative_joint_distance_rejected(self):
        with pytest.raises(InvalidSpecError):
            compute_joint_distance(40.0, 300.0, 15.0)


class TestTravel:
    def test_direct_arithmetic(self):
        spec = spec_with_lbc(60.0, 15.0, 10.0)
        assert spec.L_bc == pytest.approx(60.0, abs=1e-12)
        assert compute_x_max(spec) == pytest.approx(math.sqrt(2700.0) - 10.0, abs=1e-12)
        assert compute_x_max(spec) == pytest.approx(41.962, abs=1e-3)

    def test_degenerate_segment_rejected(self):
        with pytest.raises(InvalidSpecError):
            spec_with_lbc(30.0, 15.0, 0.0)  # L_bc == 2R fails spec validation

    def test_allowable_is_exactly_80_percent(self):
        spec = reference_spec()
        geo = loop_geometry(spec)
        assert geo.X_max == 47.5
        assert geo.X_allow == 38.0  # exact, not approximate
        assert geo.X_allow == ALLOWABLE_FRACTION * geo.X_max

    def test_x_allow_exact_for_constructed_specs(self):
        # Any spec whose X_0 is chosen to make X_max exactly 47.5 must
        # report exactly 38.0 of allowable travel.
        for L_bc, R in ((75.0, 15.0), (90.0, 20.0), (120.0, 10.0)):
            reach = math.sqrt(L_bc**2 - 4 * R**2)
            spec = spec_with_lbc(L_bc, R, reach - 47.5)
            geo = loop_geometry(spec)
            assert geo.X_max == 47.5
            assert geo.X_allow == 38.0

    def test_nonpositive_travel_rejected(self):
        spec_reach = math.sqrt(60.0**2 - 4 * 15.0**2)
        with pytest.raises(InvalidSpecError):
            compute_x_max(spec_with_lbc(60.0, 15.0, spec_reach + 1.0))


valid_specs = st.builds(
    spec_with_lbc,
    L_bc=st.floats(31.0, 300.0),
    R=st.floats(1.0, 15.0),
    X_0=st.floats(0.0, 20.0),
    d=st.floats(0.0, 100.0),
)


class TestProperties:
    @given(valid_specs)
    @settings(max_examples=200, deadline=None)
    def test_round_trip_joint_distance(self, spec):
        try:
            D = compute_loop_width(spec)
        except InvalidSpecError:
            return
        assert compute_joint_distance(D, spec.L_total, spec.R) == pytest.approx(spec.d, abs=1e-9)
        assert D >= 2 * spec.R - 1e-9

    @given(valid_specs, st.floats(1.0, 20.0))
    @settings(max_examples=200, deadline=None)
    def test_x_max_monotonic(self, spec, bump):
        try:
            x = compute_x_max(spec)
        except InvalidSpecError:
            return
        longer = spec_with_lbc(spec.L_bc + bump, spec.R, spec.X_0, spec.d)
        assert compute_x_max(longer) > x
        less_offset = spec_with_lbc(spec.L_bc, spec.R, spec.X_0 / 2, spec.d)
        if spec.X_0 > 0:
            assert compute_x_max(less_offset) >= x
        if spec.R > 2.0:
            smaller_r = spec_with_lbc(spec.L_bc, spec.R - 1.0, spec.X_0, spec.d)
            assert compute_x_max(smaller_r) > x

    @given(valid_specs)
    @settings(max_examples=100, deadline=None)
    def test_x_allow_ratio_exact(self, spec):
        try:
            geo = loop_geometry(spec)
        except InvalidSpecError:
            return
        assert geo.X_allow == 0.8 * geo.X_max


class TestSweep:
    def test_contains_reference_design(self):
        ref = reference_spec()
        results = sweep_designs(
            {"R": (15.0, 1.0, 15.0), "L_total": (180.0, 1.0, 180.0), "d": (ref.d, 1.0, ref.d)},
            max_D=90.0,
            min_X_allow=38.0,
        )
        assert len(results) == 1
        spec, geo = results[0]
        assert spec.R == 15.0 and spec.L_total == 180.0
        assert geo.D == pytest.approx(90.0, abs=1e-9)
        assert geo.X_allow == 38.0

    def test_impossible_constraint_yields_empty(self):
        assert sweep_designs({"R": (10.0, 5.0, 20.0)}, max_D=0.0) == []

    def test_grid_entries_revalidate(self):
        ranges = {"R": (12.0, 2.0, 16.0), "L_total": (170.0, 10.0, 190.0), "d": (30.0, 5.0, 40.0)}
        results = sweep_designs(ranges)
        assert len(results) <= 27
        # Exhaustive re-check: every returned entry must re-derive bitwise.
        for spec, geo in results:
            assert compute_loop_width(spec) == geo.D
            assert compute_x_max(spec) == geo.X_max
            assert geo.X_allow == 0.8 * geo.X_max
            assert geo.D >= 2 * spec.R - 1e-9
        # And the count matches a brute-force enumeration with the same rules.
        brute = 0
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    try:
                        spec = LeafSpringSpec(R=12.0 + 2 * i, L_total=170.0 + 10 * j,
                                              d=30.0 + 5 * k)
                        compute_loop_width(spec)
                        compute_x_max(spec)
                        brute += 1
                    except InvalidSpecError:
                        pass
        assert len(results) == brute

    def test_sorted_by_allowable_travel(self):
        results = sweep_designs({"L_total": (170.0, 5.0, 200.0)})
        allows = [geo.X_allow for _, geo in results]
        assert allows == sorted(allows, reverse=True)

    def test_bad_step_rejected(self):
        with pytest.raises(InvalidSpecError):
            sweep_designs({"R": (10.0, 0.0, 20.0)})

    def test_unknown_field_rejected(self):
        with pytest.raises(InvalidSpecError):
            sweep_designs({"radius": (10.0, 1.0, 20.0)})
