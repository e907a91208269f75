"""End-to-end acceptance gate.

One test per shipped claim, each tagged with a human-readable label that the
terminal summary prints as its own pass/fail line. Tolerances are pinned
here and nowhere else; if a claim cannot hold, the test stays and fails.
"""

import math
import os
import random
import time

import pytest

from gridloss import capability, control, harness, lvrt, opf, powerflow
from gridloss.capability import PvEnvelope
from gridloss.netmodel import default_dfig_envelope, parse_case
from tests.conftest import chain_case, data_text
from tests.test_control import REVERT_FIXTURE, TRIM_FIXTURE
from tests.test_opf import SINGLE_DEVICE, brute_force_single
from tests.test_powerflow import GOLDEN_33_LOSS_KW, GOLDEN_33_VMIN

K_GRID = (0.0, 0.2, 0.4, 0.6, 0.8)
SYSLAB_ENV = "GRIDLOSS_SYSLAB_DAY"


@pytest.fixture(scope="module")
def day_matrix(net33_der, day_profile):
    """Full-day reports for every decentralized controller and reserve level,
    with and without the file forecast, computed once."""
    reports = {}
    for k in K_GRID:
        for controller in (control.NO_ACTION, control.LOCAL, control.FEEDER):
            reports[controller, k, "none"] = harness.run_day(
                net33_der, day_profile, controller=controller, k=k)
        for controller in (control.LOCAL, control.FEEDER):
            reports[controller, k, "file"] = harness.run_day(
                net33_der, day_profile, controller=controller, k=k,
                forecast=harness.FORECAST_FILE)
    return reports


@pytest.mark.acceptance("power-flow fidelity: 33-bus within 0.5% of the "
                        "reference, under 1 s")
def test_power_flow_fidelity(net33):
    started = time.perf_counter()
    result = powerflow.solve(net33)
    elapsed = time.perf_counter() - started
    assert result.converged
    assert result.loss_kw() == pytest.approx(GOLDEN_33_LOSS_KW, rel=5e-3)
    vmin, vmin_bus = result.min_voltage()
    assert vmin == pytest.approx(GOLDEN_33_VMIN, rel=5e-3)
    assert elapsed < 1.0


@pytest.mark.acceptance("equation-level oracles reproduced to 1e-12")
def test_equation_level_oracles():
    env = PvEnvelope(s_rated=1.0)
    assert capability.pv_q_limit(0.6, env, 0.0) == pytest.approx(0.45,
                                                                 abs=1e-12)
    assert capability.pv_q_limit(0.6, env, 0.6) == pytest.approx(0.18,
                                                                 abs=1e-12)
    device = parse_case(chain_case(2, {2: 0.0}, [(2, 1.0, 0.6)])).devices[0]
    assert control.llma_setpoint(0.7, 0.6, device, 0.0) == pytest.approx(
        0.45, abs=1e-12)
    assert control.llma_setpoint(0.7, 0.6, device, 0.6) == pytest.approx(
        0.18, abs=1e-12)
    assert control.llma_setpoint(0.3, 0.6, device, 0.0) == pytest.approx(
        0.3, abs=1e-12)
    assert control.forecast_adjusted_setpoint(
        0.2, 0.6, 0.5, device, 0.0) == pytest.approx(0.45, abs=1e-12)
    assert control.forecast_adjusted_setpoint(
        0.6, 0.2, 0.5, device, 0.0) == pytest.approx(0.45, abs=1e-12)


@pytest.mark.acceptance("full-day loss ordering: no-action >= local >= "
                        "feeder at every k; forecasts never hurt")
def test_day_loss_ordering(day_matrix):
    for k in K_GRID:
        idle = day_matrix[control.NO_ACTION, k, "none"]
        local = day_matrix[control.LOCAL, k, "none"]
        feeder = day_matrix[control.FEEDER, k, "none"]
        assert idle.warning_count == 0
        assert idle.energy_loss_kwh >= local.energy_loss_kwh - 1e-9
        assert local.energy_loss_kwh >= feeder.energy_loss_kwh - 1e-9
        for controller in (control.LOCAL, control.FEEDER):
            plain = day_matrix[controller, k, "none"]
            boosted = day_matrix[controller, k, "file"]
            for before, after in zip(plain.trace, boosted.trace):
                assert after.loss_kw <= before.loss_kw + 1e-9
    idle0 = day_matrix[control.NO_ACTION, 0.0, "none"].energy_loss_kwh
    feeder0 = day_matrix[control.FEEDER, 0.0, "none"].energy_loss_kwh
    reduction = 100.0 * (1.0 - feeder0 / idle0)
    print(f"feeder-mode energy-loss reduction on the shipped day at k=0: "
          f"{reduction:.1f}% (reported, not asserted)")


@pytest.mark.acceptance("published-day loss reproduction (set "
                        "GRIDLOSS_SYSLAB_DAY to the dataset CSV to enable)")
@pytest.mark.skipif(SYSLAB_ENV not in os.environ,
                    reason="published dataset not supplied; set "
                           f"{SYSLAB_ENV} to its profile CSV path")
def test_published_day_reproduction(net33_der):
    with open(os.environ[SYSLAB_ENV], encoding="utf-8") as handle:
        profile = harness.ingest_timeseries(handle.read())
    started = time.perf_counter()
    reports = {
        (controller, k): harness.run_day(net33_der, profile,
                                         controller=controller, k=k)
        for controller in (control.NO_ACTION, control.LOCAL, control.FEEDER)
        for k in K_GRID}
    elapsed = time.perf_counter() - started
    feeder = reports[control.FEEDER, 0.0]
    assert feeder.avg_loss_kw == pytest.approx(7.59, rel=0.05)
    assert feeder.energy_loss_kwh == pytest.approx(182.09, rel=0.05)
    disconnected = harness.run_day(net33_der, profile,
                                   controller=control.FEEDER,
                                   night_policy=harness.DISCONNECTED)
    decrease = 1.0 - disconnected.energy_loss_kwh / feeder.energy_loss_kwh
    assert 0.02 <= decrease <= 0.20
    assert elapsed < 120.0


@pytest.mark.acceptance("reserve monotonicity: capabilities and local plans "
                        "never grow with k (>= 1000 randomized cases)")
def test_reserve_monotonicity():
    rng = random.Random(20240615)
    cases = 0
    for _ in range(250):
        s_rated = rng.uniform(0.05, 2.0)
        pv = PvEnvelope(s_rated=s_rated)
        p_grid = [rng.uniform(0.0, s_rated) for _ in range(3)]
        p_rated = rng.uniform(0.1, 2.0)
        dfig = default_dfig_envelope().scaled(p_rated)
        for p_g in p_grid:
            caps = [capability.pv_q_limit(p_g, pv, k) for k in K_GRID]
            assert all(b <= a + 1e-15 for a, b in zip(caps, caps[1:]))
            w = p_g / s_rated * p_rated
            caps = [capability.dfig_q_limit(w, dfig, k) for k in K_GRID]
            assert all(b <= a + 1e-15 for a, b in zip(caps, caps[1:]))
            cases += 2
    for _ in range(40):
        n = rng.randint(3, 9)
        loads = {b: round(rng.uniform(0.0, 0.08), 4) for b in range(2, n + 1)}
        device_buses = rng.sample(range(2, n + 1), rng.randint(1, n - 1))
        devices = [(b, 0.5, round(rng.uniform(0.05, 0.45), 3))
                   for b in device_buses]
        net = parse_case(chain_case(n, loads, devices))
        plans = [control.llma_plan(net, k).setpoints for k in K_GRID]
        for looser, tighter in zip(plans, plans[1:]):
            assert all(tighter[b] <= looser[b] + 1e-15 for b in looser)
            cases += len(looser)
    assert cases >= 1000


@pytest.mark.acceptance("grid-code response: deep sag draws the full 0.6 "
                        "MVar from the turbine under every controller and k")
def test_deep_sag_full_capacity_injection(net33_der, deep_sag):
    planners = dict(control.PLANNERS)
    planners[opf.CENTRAL] = opf.opf_plan
    for name, planner in planners.items():
        for k in K_GRID:
            study = lvrt.simulate_fault(net33_der, deep_sag,
                                        planner(net33_der, k))
            turbine = next(r for r in study.responses if r.bus == 27)
            assert turbine.voltage < 0.5
            assert turbine.current_ratio == 1.0
            assert turbine.q_injected == pytest.approx(0.06, abs=1e-12), \
                f"{name} at k={k}"
    assert lvrt.required_reactive_current(1.0) == pytest.approx(0.0,
                                                                abs=1e-12)
    assert lvrt.required_reactive_current(0.7) == pytest.approx(0.5,
                                                                abs=1e-12)
    assert lvrt.required_reactive_current(0.3) == pytest.approx(1.0,
                                                                abs=1e-12)


@pytest.mark.acceptance("recovery surrogate: never slower with more reserve, "
                        "never faster with a forecast")
def test_recovery_surrogate_ordering(net33_der, day_profile, deep_sag):
    row = 50  # mid-morning ramp: forecasts differ from the measurements
    base_kw = net33_der.base_mva * 1000.0
    p_now = {d.bus: harness.clamped_generation(
                 d, day_profile.generation[d.bus][row], base_kw)
             for d in net33_der.devices}
    p_ahead = {d.bus: harness.clamped_generation(
                   d, day_profile.forecast[d.bus][row], base_kw)
               for d in net33_der.devices}
    for planner in (control.llma_plan, control.lfma_plan):
        plain_recoveries = []
        for k in K_GRID:
            plain = lvrt.simulate_fault(
                net33_der, deep_sag, planner(net33_der, k, p_now))
            boosted = lvrt.simulate_fault(
                net33_der, deep_sag,
                control.forecast_plan(planner, net33_der, k, p_now, p_ahead))
            assert plain.recovered and boosted.recovered
            assert boosted.recovery_time >= plain.recovery_time
            plain_recoveries.append(plain.recovery_time)
        assert all(b <= a for a, b in zip(plain_recoveries,
                                          plain_recoveries[1:]))


@pytest.mark.acceptance("central baseline: brute-force agreement, honest "
                        "fallback, never worse than no action")
def test_central_baseline(net5, net33_der):
    net = parse_case(SINGLE_DEVICE)
    cap = net.devices[0].q_capability(0.2, 0.0)
    brute_q, _ = brute_force_single(net, cap)
    result = opf.solve_opf(net, 0.0)
    assert result.status is opf.OpfStatus.CONVERGED
    assert result.plan.setpoints[3] == pytest.approx(brute_q, abs=1e-4)

    fallback = opf.solve_opf(net5, 0.0, max_sweeps=0)
    assert fallback.fell_back
    idle = control.no_action_plan(net5)
    assert fallback.plan.setpoints == idle.setpoints
    assert fallback.loss == pytest.approx(
        control.evaluate_plan(net5, idle).total_loss())

    for fixture in (net5, net33_der, parse_case(TRIM_FIXTURE),
                    parse_case(REVERT_FIXTURE)):
        idle_loss = control.evaluate_plan(
            fixture, control.no_action_plan(fixture)).total_loss()
        solved = opf.solve_opf(fixture, 0.2)
        assert solved.status is opf.OpfStatus.CONVERGED
        assert solved.loss <= idle_loss + 1e-15


@pytest.mark.acceptance("feeder mode is optimal within its reachable "
                        "setpoint family on the 5-bus chain")
def test_feeder_mode_small_instance_oracle(net5):
    # the junction device can only land on one of three setpoints: its
    # local value, the boosted value, or the boost shaved by the measured
    # reversal; leaves always keep the local value
    for k in K_GRID:
        plan = control.lfma_plan(net5, k)
        lfma_loss = control.evaluate_plan(net5, plan).total_loss()
        diag = plan.diagnostics[3]
        trimmed = min(max(diag["q_boosted"] - abs(diag["q_arriving_boosted"]),
                          0.0), net5.device_at(3).q_capability(0.3, k))
        family = {diag["q_local"], diag["q_boosted"], trimmed}
        best = min(
            control.evaluate_plan(
                net5, control.ControlPlan(control.FEEDER, k,
                                          {3: q3, 5: plan.setpoints[5]},
                                          plan.p_outputs)).total_loss()
            for q3 in family)
        assert lfma_loss <= best + 1e-6

    # the three correction outcomes are all reachable on shipped fixtures
    outcomes = {plan.diagnostics[3]["outcome"]}
    trim_plan = control.lfma_plan(parse_case(TRIM_FIXTURE), 0.0)
    revert_plan = control.lfma_plan(parse_case(REVERT_FIXTURE), 0.0)
    outcomes |= {d["outcome"] for d in trim_plan.diagnostics.values()}
    outcomes |= {d["outcome"] for d in revert_plan.diagnostics.values()}
    assert outcomes == {"kept", "trimmed", "reverted"}
