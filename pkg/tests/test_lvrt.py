"""Ride-through requirement curve and the quasi-static fault surrogate."""

import math

import pytest
from hypothesis import given, strategies as st

from gridloss import control, lvrt
from gridloss.control import ControlPlan
from gridloss.lvrt import (FaultScenario, GridCodeCurve, RideThroughZone,
                           ScenarioFormatError, parse_scenario,
                           required_reactive_current, sag_attenuation,
                           simulate_fault)
from gridloss.netmodel import parse_case
from tests.conftest import chain_case


# ---------------------------------------------------------------------------
# Requirement curve.

@pytest.mark.parametrize("voltage,expected", [
    (1.05, 0.0), (1.0, 0.0), (0.9, 0.0),
    (0.7, 0.5), (0.5, 1.0), (0.3, 1.0), (0.1, 1.0),
])
def test_required_current_anchor_points(voltage, expected):
    assert required_reactive_current(voltage) == pytest.approx(expected,
                                                               abs=1e-12)


@given(st.floats(min_value=0.2, max_value=1.1),
       st.floats(min_value=0.2, max_value=1.1))
def test_required_current_never_rises_with_voltage(v1, v2):
    lo, hi = sorted((v1, v2))
    assert required_reactive_current(lo) >= required_reactive_current(hi)
    assert 0.0 <= required_reactive_current(lo) <= 1.0


@pytest.mark.parametrize("voltage,zone", [
    (1.0, RideThroughZone.NORMAL), (0.9, RideThroughZone.NORMAL),
    (0.89, RideThroughZone.SUPPORT), (0.5, RideThroughZone.SUPPORT),
    (0.49, RideThroughZone.FULL_SUPPORT), (0.2, RideThroughZone.FULL_SUPPORT),
    (0.19, RideThroughZone.TRIP_ALLOWED), (0.0, RideThroughZone.TRIP_ALLOWED),
])
def test_zone_boundaries(voltage, zone):
    assert lvrt.ride_through_zone(voltage) is zone


def test_custom_curve_moves_the_ramp():
    curve = GridCodeCurve(v_normal_low=0.8, v_full_low=0.6, v_trip_low=0.3)
    assert required_reactive_current(0.7, curve) == pytest.approx(0.5)
    assert curve.zone(0.85) is RideThroughZone.NORMAL
    assert curve.zone(0.25) is RideThroughZone.TRIP_ALLOWED


@pytest.mark.parametrize("bounds", [
    dict(v_normal_low=0.5, v_full_low=0.5),      # ramp collapses
    dict(v_full_low=0.1),                         # below the trip bound
    dict(v_normal_low=1.0),                       # touches nominal
    dict(v_trip_low=0.0),
])
def test_curve_boundary_ordering_is_enforced(bounds):
    with pytest.raises(ValueError):
        GridCodeCurve(**bounds)


# ---------------------------------------------------------------------------
# Scenario files.

def test_parse_shipped_scenario(deep_sag):
    assert deep_sag == FaultScenario(bus=27, sag=0.6, t_start=1.0,
                                     duration=0.15, dt=0.01)
    assert deep_sag.t_clear == pytest.approx(1.15)


def test_parse_scenario_defaults_and_comments():
    scenario = parse_scenario("% worst case\nbus = 5  # feeder end\nsag=0.3\n")
    assert scenario == FaultScenario(bus=5, sag=0.3)
    assert scenario.t_start == 0.0
    assert scenario.duration == 0.15
    assert scenario.dt == 0.01


@pytest.mark.parametrize("text,fragment", [
    ("bus 5\nsag=0.3", "key = value"),
    ("bus=5\nsag=0.3\ndepth=2", "unknown key"),
    ("bus=5\nbus=6\nsag=0.3", "duplicate"),
    ("bus=five\nsag=0.3", "bad value"),
    ("sag=0.3", "missing 'bus'"),
    ("bus=5", "missing 'sag'"),
    ("bus=5\nsag=1.0", "[0, 1)"),
    ("bus=5\nsag=-0.1", "[0, 1)"),
    ("bus=5\nsag=0.3\nt_start=-1", "t_start"),
    ("bus=5\nsag=0.3\nduration=0", "duration"),
    ("bus=5\nsag=0.3\ndt=-0.01", "dt"),
])
def test_malformed_scenarios_are_rejected(text, fragment):
    with pytest.raises(ScenarioFormatError) as err:
        parse_scenario(text)
    assert fragment in str(err.value)


def test_scenario_bus_must_exist(net5):
    plan = control.no_action_plan(net5)
    with pytest.raises(ScenarioFormatError):
        simulate_fault(net5, FaultScenario(bus=77, sag=0.4), plan)


# ---------------------------------------------------------------------------
# Sag propagation along the feeder.

def test_attenuation_on_a_uniform_chain(net5):
    # shared source-path impedance over the fault's total: 3/4 at the bus
    # one hop above, 1/4 three hops above, nothing at the source
    assert sag_attenuation(net5, 5, 5) == 1.0
    assert sag_attenuation(net5, 5, 4) == pytest.approx(0.75)
    assert sag_attenuation(net5, 5, 2) == pytest.approx(0.25)
    assert sag_attenuation(net5, 5, 1) == pytest.approx(0.0, abs=1e-12)
    # everything downstream of the fault rides at the full sag
    assert sag_attenuation(net5, 3, 4) == 1.0
    assert sag_attenuation(net5, 3, 5) == 1.0
    assert sag_attenuation(net5, 3, 2) == pytest.approx(0.5)


def test_attenuation_of_a_source_side_fault(net5):
    assert sag_attenuation(net5, 1, 1) == 1.0
    assert sag_attenuation(net5, 1, 4) == 0.0


# ---------------------------------------------------------------------------
# Fault studies.

def test_zero_sag_changes_nothing(net5):
    plan = control.llma_plan(net5, 0.0)
    study = simulate_fault(net5, FaultScenario(bus=5, sag=0.0), plan)
    assert study.v_during == study.v_pre
    assert study.max_voltage_deviation == 0.0
    assert study.recovery_time == 0.0
    assert study.recovered


def test_deep_sag_releases_all_reserves(net33_der, deep_sag):
    # even with 80% of capability held back in normal operation, the fault
    # response draws on the full envelope
    plan = control.llma_plan(net33_der, 0.8)
    study = simulate_fault(net33_der, deep_sag, plan)
    by_bus = {r.bus: r for r in study.responses}
    turbine = by_bus[27]
    assert turbine.zone is RideThroughZone.FULL_SUPPORT
    assert turbine.current_ratio == 1.0
    assert turbine.q_injected == pytest.approx(0.06, abs=1e-12)  # 0.6 MVar
    # the neighbours on the same lateral sag below 0.5 pu too
    assert by_bus[30].q_injected == pytest.approx(by_bus[30].q_capability)
    assert by_bus[6].zone is RideThroughZone.FULL_SUPPORT
    assert not any(r.tripped for r in study.responses)


def test_remote_shallow_sag_keeps_the_scheduled_output(net33_der):
    # fault out on the first lateral: every device stays in the normal zone,
    # and the scheduled dispatch is the floor of the injected current
    plan = control.llma_plan(net33_der, 0.0)
    study = simulate_fault(net33_der, FaultScenario(bus=22, sag=0.3), plan)
    by_bus = {r.bus: r for r in study.responses}
    assert all(r.zone is RideThroughZone.NORMAL for r in study.responses)
    assert by_bus[24].current_ratio == pytest.approx(
        plan.setpoints[24] / by_bus[24].q_capability)
    assert by_bus[24].q_injected == pytest.approx(plan.setpoints[24])


def test_near_collapse_sag_allows_disconnection(net33_der):
    plan = control.llma_plan(net33_der, 0.0)
    scenario = FaultScenario(bus=30, sag=0.85, t_start=0.05)
    study = simulate_fault(net33_der, scenario, plan)
    by_bus = {r.bus: r for r in study.responses}
    assert by_bus[30].tripped
    assert by_bus[30].zone is RideThroughZone.TRIP_ALLOWED
    assert by_bus[30].current_ratio == 0.0 and by_bus[30].q_injected == 0.0
    assert not by_bus[6].tripped
    # in the trace the device carries its plan before the fault hits and
    # drops to zero from the fault onward
    order = [d.bus for d in net33_der.devices]
    col = order.index(30)
    assert study.trace[0].ratios[col] == pytest.approx(1.0)
    assert all(p.ratios[col] == 0.0 for p in study.trace
               if p.t >= scenario.t_start)


def test_unsolvable_prefault_state_is_reported_severe():
    net = parse_case(chain_case(4, {2: 30.0, 3: 30.0, 4: 30.0},
                                [(3, 0.3, 0.2)]))
    plan = control.no_action_plan(net)
    study = simulate_fault(net, FaultScenario(bus=4, sag=0.5), plan)
    assert study.severe
    assert study.responses == () and study.trace == ()
    assert study.recovery_time == math.inf and not study.recovered
    assert math.isnan(study.headroom) and math.isnan(study.tau)


def test_relaxation_constant_follows_unscheduled_headroom(net33_der, deep_sag):
    plan = control.llma_plan(net33_der, 0.4)
    study = simulate_fault(net33_der, deep_sag, plan)
    caps = sum(r.q_capability for r in study.responses)
    scheduled = sum(plan.setpoints.values())
    assert study.headroom == pytest.approx(caps - scheduled, rel=1e-12)
    assert study.tau == pytest.approx(lvrt.TAU_SCALE / study.headroom,
                                      rel=1e-12)


def test_overcommitted_plans_only_slow_the_recovery(net33_der, deep_sag):
    # schedule more than today's capability (a stale forecast can do this):
    # the deeper the over-commitment, the longer the time constant
    base = control.llma_plan(net33_der, 0.0)
    taus = []
    for extra in (0.0, 0.05, 0.10):
        setpoints = {b: q + extra for b, q in base.setpoints.items()}
        plan = ControlPlan(base.controller, 0.0, setpoints, base.p_outputs)
        study = simulate_fault(net33_der, deep_sag, plan)
        assert math.isfinite(study.tau) and study.tau > 0.0
        taus.append(study.tau)
    assert taus[0] < taus[1] < taus[2]


def test_holding_reserves_speeds_up_recovery(net33_der, deep_sag):
    recoveries = [
        simulate_fault(net33_der, deep_sag,
                       control.llma_plan(net33_der, k)).recovery_time
        for k in (0.0, 0.4, 0.8)]
    assert recoveries[0] >= recoveries[1] >= recoveries[2] > 0.0


def test_recovery_lands_on_the_time_grid(net33_der, deep_sag):
    plan = control.llma_plan(net33_der, 0.2)
    study = simulate_fault(net33_der, deep_sag, plan)
    exact = study.tau * math.log(
        (study.v_settled - study.v_dip)
        / (study.v_settled - lvrt.RECOVERY_THRESHOLD))
    assert study.recovery_time == math.ceil(exact / deep_sag.dt) * deep_sag.dt
    assert study.recovery_time >= exact


def test_trace_shape_and_compliance(net33_der, deep_sag):
    plan = control.llma_plan(net33_der, 0.2)
    study = simulate_fault(net33_der, deep_sag, plan)
    times = [p.t for p in study.trace]
    assert times[0] == 0.0
    steps = [b - a for a, b in zip(times, times[1:])]
    assert all(s == pytest.approx(deep_sag.dt) for s in steps)
    assert all(0.0 <= r <= 1.0 for p in study.trace for r in p.ratios)
    assert all(p.compliant for p in study.trace)
    assert study.trace[-1].v_min >= lvrt.RECOVERY_THRESHOLD
    assert study.trace[-1].t >= deep_sag.t_clear + study.recovery_time


def test_trace_length_is_bounded(net33_der):
    scenario = FaultScenario(bus=27, sag=0.6, t_start=1.0, duration=0.15,
                             dt=1e-5)
    study = simulate_fault(net33_der, scenario,
                           control.llma_plan(net33_der, 0.0))
    assert len(study.trace) == lvrt.MAX_TRACE_SAMPLES
