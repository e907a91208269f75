"""In-process implementations of the service operations.

Each handler takes a request model and returns a response model; the HTTP
app and the CLI both call these directly. Input problems raise the parser
errors or ValueError (mapped to usage failures); solver breakdowns raise
NonConvergenceError (mapped to runtime failures).
"""

from __future__ import annotations

import cmath
import math

from .. import control, harness, lvrt, opf, powerflow
from ..netmodel import Network, parse_case
from . import schemas


def _check_controller(name: str) -> str:
    if name not in schemas.CONTROLLER_NAMES:
        raise ValueError(f"controller must be one of {schemas.CONTROLLER_NAMES}, "
                         f"got {name!r}")
    return name


def _check_k_values(values) -> list:
    if not values:
        raise ValueError("at least one reserve coefficient is required")
    for k in values:
        if not 0.0 <= k <= 1.0:
            raise ValueError(f"reserve coefficient must be in [0, 1], got {k}")
    return list(values)


def _make_plan(net: Network, controller: str, k: float,
               p_now: dict = None, p_ahead: dict = None):
    """(plan, fell_back flag or None) for one controller invocation."""
    if controller == opf.CENTRAL:
        if p_ahead is not None:
            raise ValueError("forecast adjustment applies to the decentralized "
                             "controllers, not the centralized baseline")
        result = opf.solve_opf(net, k, p_now)
        return result.plan, result.fell_back
    planner = control.PLANNERS[controller]
    if p_ahead is None:
        return planner(net, k, p_now), None
    return control.forecast_plan(planner, net, k, p_now, p_ahead), None


def _operating_point(net: Network, profile_csv, forecast_mode: str):
    """(p_now, p_ahead) in pu from an optional profile's first row."""
    p_now = None
    p_ahead = None
    base_kw = net.base_mva * 1000.0
    profile = None
    if profile_csv is not None:
        profile = harness.ingest_timeseries(profile_csv)
        p_now = {}
        for dev in net.devices:
            if dev.bus in profile.generation:
                p_now[dev.bus] = harness.clamped_generation(
                    dev, profile.generation[dev.bus][0], base_kw)
            else:
                p_now[dev.bus] = dev.p_out
    if forecast_mode == harness.FORECAST_PERSISTENCE:
        p_ahead = dict(p_now) if p_now is not None else \
            {d.bus: d.p_out for d in net.devices}
    elif forecast_mode == harness.FORECAST_FILE:
        if profile is None or not profile.forecast:
            raise harness.ProfileSchemaError(
                "forecast mode 'file' needs a profile with forecast columns")
        base_now = p_now or {d.bus: d.p_out for d in net.devices}
        p_ahead = {dev.bus: (harness.clamped_generation(
                                 dev, profile.forecast[dev.bus][0], base_kw)
                             if dev.bus in profile.forecast
                             else base_now[dev.bus])
                   for dev in net.devices}
    elif forecast_mode != harness.FORECAST_NONE:
        raise ValueError(f"unknown forecast mode {forecast_mode!r}")
    return p_now, p_ahead


def handle_powerflow(req: schemas.PowerFlowRequest) -> schemas.PowerFlowResponse:
    net = parse_case(req.case_text)
    controller = _check_controller(req.controller)
    base_kw = net.base_mva * 1000.0
    runs = []
    for k in _check_k_values(req.k):
        plan, fell_back = _make_plan(net, controller, k)
        solution = powerflow.solve(net, plan.injections(net),
                                   tol=req.solver.tolerance,
                                   max_iterations=req.solver.max_iterations)
        vmin, vmin_bus = solution.min_voltage()
        buses = [schemas.BusRow(bus=b.id,
                                v_mag=abs(solution.voltages[b.id]),
                                v_angle_deg=math.degrees(
                                    cmath.phase(solution.voltages[b.id])))
                 for b in net.buses]
        branches = [schemas.BranchRow(
            index=f.index, from_bus=f.from_bus, to_bus=f.to_bus,
            p_from_kw=f.s_from.real * base_kw, q_from_kvar=f.s_from.imag * base_kw,
            p_to_kw=f.s_to.real * base_kw, q_to_kvar=f.s_to.imag * base_kw,
            loss_kw=f.loss.real * base_kw) for f in solution.branch_flows]
        runs.append(schemas.PowerFlowRun(
            controller=controller, k=k,
            setpoints_kvar={b: q * base_kw for b, q in sorted(plan.setpoints.items())},
            iterations=solution.iterations,
            total_loss_kw=solution.loss_kw(),
            min_voltage=vmin, min_voltage_bus=vmin_bus,
            slack_p_kw=solution.slack_power.real * base_kw,
            slack_q_kvar=solution.slack_power.imag * base_kw,
            fell_back=fell_back, buses=buses, branches=branches))
    return schemas.PowerFlowResponse(
        case_name=net.name, base_mva=net.base_mva,
        solver=req.solver, runs=runs)


def handle_day(req: schemas.DayRequest) -> schemas.DayResponse:
    net = parse_case(req.case_text)
    controller = _check_controller(req.controller)
    profile = harness.ingest_timeseries(req.profile_csv)
    runs = []
    for k in _check_k_values(req.k):
        report = harness.run_day(
            net, profile, controller=controller, k=k,
            forecast=req.forecast, night_policy=req.night_policy,
            tolerance=req.solver.tolerance,
            max_iterations=req.solver.max_iterations)
        trace = []
        for rec in report.trace:
            trace.append(schemas.DayTraceRow(
                timestamp=rec.timestamp.isoformat(),
                loss_kw=None if rec.diverged else rec.loss_kw,
                min_voltage=None if rec.diverged else rec.min_voltage,
                min_voltage_bus=None if rec.diverged else rec.min_voltage_bus,
                setpoints_kvar=rec.setpoints_kvar,
                curtailed=list(rec.curtailed),
                fell_back=rec.fell_back, diverged=rec.diverged))
        runs.append(schemas.DayRun(
            controller=report.controller, k=report.k,
            night_policy=report.night_policy, forecast=report.forecast,
            avg_loss_kw=(report.avg_loss_kw
                         if math.isfinite(report.avg_loss_kw) else None),
            energy_loss_kwh=report.energy_loss_kwh,
            fallback_count=report.fallback_count,
            warning_count=report.warning_count,
            step_hours=report.step_hours, trace=trace))
    return schemas.DayResponse(case_name=net.name, base_mva=net.base_mva,
                               solver=req.solver, runs=runs)


def handle_fault(req: schemas.FaultRequest) -> schemas.FaultResponse:
    net = parse_case(req.case_text)
    controller = _check_controller(req.controller)
    scenario = lvrt.parse_scenario(req.scenario_text)
    base_kw = net.base_mva * 1000.0
    p_now, p_ahead = _operating_point(net, req.profile_csv, req.forecast)
    runs = []
    for k in _check_k_values(req.k):
        plan, _ = _make_plan(net, controller, k, p_now, p_ahead)
        study = lvrt.simulate_fault(net, scenario, plan)
        if study.severe:
            runs.append(schemas.FaultRun(
                controller=controller, k=k, forecast=req.forecast, severe=True,
                v_dip=None, v_settled=None, max_voltage_deviation=None,
                headroom_kvar=None, tau_s=None, recovery_time_s=None,
                recovered=False, device_buses=[d.bus for d in net.devices],
                devices=[], trace=[]))
            continue
        devices = [schemas.DeviceResponseRow(
            bus=r.bus, voltage=r.voltage, zone=r.zone.value,
            current_ratio=r.current_ratio,
            q_capability_kvar=r.q_capability * base_kw,
            q_injected_kvar=r.q_injected * base_kw,
            tripped=r.tripped) for r in study.responses]
        trace = [schemas.FaultTraceRow(t=p.t, v_min=p.v_min,
                                       ratios=list(p.ratios),
                                       compliant=p.compliant)
                 for p in study.trace]
        runs.append(schemas.FaultRun(
            controller=controller, k=k, forecast=req.forecast, severe=False,
            v_dip=study.v_dip, v_settled=study.v_settled,
            max_voltage_deviation=study.max_voltage_deviation,
            headroom_kvar=study.headroom * base_kw, tau_s=study.tau,
            recovery_time_s=(study.recovery_time
                             if math.isfinite(study.recovery_time) else None),
            recovered=study.recovered,
            device_buses=[d.bus for d in net.devices],
            devices=devices, trace=trace))
    return schemas.FaultResponse(
        case_name=net.name, base_mva=net.base_mva,
        scenario={"bus": float(scenario.bus), "sag": scenario.sag,
                  "t_start": scenario.t_start, "duration": scenario.duration,
                  "dt": scenario.dt},
        solver=req.solver, runs=runs)


def handle_validate(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
    from ..netmodel import (CaseFormatError, CaseSemanticError, TopologyError,
                            orient_radial)
    try:
        net = parse_case(req.case_text)
        tree = orient_radial(net)
    except (CaseFormatError, CaseSemanticError, TopologyError) as exc:
        return schemas.ValidateResponse(valid=False, error=str(exc))
    return schemas.ValidateResponse(
        valid=True, case_name=net.name, bus_count=net.n_bus,
        branch_count=len(net.branches), device_count=len(net.devices),
        slack_bus=net.slack_bus, leaves=sorted(tree.leaves))
