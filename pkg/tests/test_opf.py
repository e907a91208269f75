"""Centralized dispatch baseline: golden-section descent and its fallback."""

import math

import pytest

from gridloss import control, opf, powerflow
from gridloss.netmodel import parse_case
from tests.conftest import chain_case

SINGLE_DEVICE = chain_case(3, {2: 0.05, 3: 0.12}, [(3, 0.3, 0.2)])


def brute_force_single(net, cap, points=3001):
    dev_bus = net.devices[0].bus
    best_q, best_loss = 0.0, math.inf
    for i in range(points):
        q = cap * i / (points - 1)
        plan = control.ControlPlan(opf.CENTRAL, 0.0, {dev_bus: q},
                                   {dev_bus: net.devices[0].p_out})
        loss = control.evaluate_plan(net, plan).total_loss()
        if loss < best_loss:
            best_q, best_loss = q, loss
    return best_q, best_loss


def test_golden_section_finds_an_interior_minimum():
    x, fx = opf._golden_min(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-12)


def test_golden_section_keeps_the_endpoints_in_play():
    lo, _ = opf._golden_min(lambda x: x, 0.0, 1.0, 1e-8)
    hi, _ = opf._golden_min(lambda x: -x, 0.0, 1.0, 1e-8)
    assert lo == 0.0
    assert hi == 1.0


def test_single_device_matches_a_brute_force_scan():
    net = parse_case(SINGLE_DEVICE)
    cap = net.devices[0].q_capability(0.2, 0.0)
    brute_q, brute_loss = brute_force_single(net, cap)
    result = opf.solve_opf(net, 0.0)
    assert result.status is opf.OpfStatus.CONVERGED
    assert result.plan.setpoints[3] == pytest.approx(brute_q, abs=1e-4)
    assert result.loss <= brute_loss + 1e-12


def test_never_beaten_by_doing_nothing(net5, net33_der):
    for net in (net5, net33_der):
        idle_loss = control.evaluate_plan(
            net, control.no_action_plan(net)).total_loss()
        result = opf.solve_opf(net, 0.2)
        assert result.status is opf.OpfStatus.CONVERGED
        assert result.loss <= idle_loss
        for dev in net.devices:
            cap = dev.q_capability(result.plan.p_outputs[dev.bus], 0.2)
            assert 0.0 <= result.plan.setpoints[dev.bus] <= cap + 1e-12


def test_sweep_budget_exhaustion_falls_back(net5):
    idle_loss = control.evaluate_plan(
        net5, control.no_action_plan(net5)).total_loss()
    result = opf.solve_opf(net5, 0.0, max_sweeps=0)
    assert result.status is opf.OpfStatus.FELL_BACK
    assert result.fell_back
    assert result.sweeps == 0
    assert result.plan.setpoints == {3: 0.0, 5: 0.0}
    assert result.loss == pytest.approx(idle_loss)
    assert result.plan.diagnostics["fell_back"] is True


def test_no_devices_converges_immediately(net33):
    result = opf.solve_opf(net33, 0.0)
    assert result.status is opf.OpfStatus.CONVERGED
    assert result.plan.setpoints == {}
    assert result.loss == pytest.approx(
        powerflow.solve(net33).total_loss())


def test_full_reserve_pins_everything_at_zero(net5):
    result = opf.solve_opf(net5, 1.0)
    assert result.status is opf.OpfStatus.CONVERGED
    assert result.plan.setpoints == {3: 0.0, 5: 0.0}


def test_unsolvable_base_state_falls_back_with_nan():
    net = parse_case(chain_case(4, {2: 30.0, 3: 30.0, 4: 30.0},
                                [(3, 0.3, 0.2)]))
    result = opf.solve_opf(net, 0.0)
    assert result.status is opf.OpfStatus.FELL_BACK
    assert math.isnan(result.loss)
    assert all(q == 0.0 for q in result.plan.setpoints.values())


def test_divergence_during_the_search_falls_back(net5, monkeypatch):
    idle_loss = control.evaluate_plan(
        net5, control.no_action_plan(net5)).total_loss()
    real_solve = powerflow.solve
    calls = []

    def flaky_solve(*args, **kwargs):
        # the no-action measurement succeeds, every search trial diverges
        calls.append(1)
        if len(calls) > 1:
            raise powerflow.NonConvergenceError(1, 1.0)
        return real_solve(*args, **kwargs)

    monkeypatch.setattr(powerflow, "solve", flaky_solve)
    result = opf.solve_opf(net5, 0.0)
    assert result.status is opf.OpfStatus.FELL_BACK
    assert result.loss == pytest.approx(idle_loss)
    assert result.plan.setpoints == {3: 0.0, 5: 0.0}


def test_planner_entry_point_returns_the_plan(net5):
    plan = opf.opf_plan(net5, 0.2)
    assert plan.controller == opf.CENTRAL
    assert set(plan.diagnostics) == {"fell_back", "sweeps", "evaluations"}
    assert plan.diagnostics["fell_back"] is False
    assert plan.diagnostics["evaluations"] > 0


def test_search_is_deterministic(net5):
    first = opf.solve_opf(net5, 0.2)
    second = opf.solve_opf(net5, 0.2)
    assert first.plan.setpoints == second.plan.setpoints
    assert first.evaluations == second.evaluations
