"""Decentralized reactive-power controllers for loss minimization.

Two measurement-driven strategies set inverter reactive output without any
central optimization:

* local mode: each device covers the reactive demand of its own bus, up to
  its reserve-scaled capability;
* feeder mode: devices at junction buses additionally cover the reactive
  flow arriving on their heaviest incident line, with a correction pass
  that backs off (or abandons) the extra injection when it reverses the
  upstream flow.

Both leave active output untouched and never ask a device for more than
``(1 - k)`` of its physical capability, where ``k`` is the reserve
coefficient held back for voltage support during faults.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import powerflow
from .netmodel import Network, RadialTree, orient_radial

NO_ACTION = "noaction"
LOCAL = "llma"
FEEDER = "lfma"


@dataclass(frozen=True)
class ControlPlan:
    """Reactive setpoints (pu) for every device bus, plus the active outputs
    the controller assumed when it measured the network."""

    controller: str
    k: float
    setpoints: dict
    p_outputs: dict
    diagnostics: dict = field(default_factory=dict, compare=False)

    def injections(self, net: Network) -> dict:
        return powerflow.device_injections(net, self.setpoints, self.p_outputs)


def evaluate_plan(net: Network, plan: ControlPlan, *,
                  tree: RadialTree = None) -> powerflow.PowerFlowResult:
    """Solve the network with the plan applied."""
    return powerflow.solve(net, plan.injections(net), tree=tree)


def _resolved_p(net: Network, p_outputs: dict = None) -> dict:
    p_outputs = p_outputs or {}
    return {d.bus: p_outputs.get(d.bus, d.p_out) for d in net.devices}


def llma_setpoint(q_load: float, p_g: float, device, k) -> float:
    """Local-mode setpoint: bus reactive demand capped by scaled capability.

    Negative (capacitive) local load clamps to zero — devices only inject.
    """
    return min(max(q_load, 0.0), device.q_capability(p_g, k))


def feeder_setpoint(q_load: float, q_upstream: float, p_g: float,
                    device, k) -> float:
    """Junction-mode setpoint: local demand plus measured arriving flow,
    capped by scaled capability and floored at zero."""
    return min(max(max(q_load, 0.0) + q_upstream, 0.0),
               device.q_capability(p_g, k))


def forecast_adjusted_setpoint(p_current: float, p_forecast: float,
                               q_load: float, device, k,
                               q_upstream: float = None) -> float:
    """Setpoint formula evaluated at the measured and at the forecast
    active output, keeping whichever allows more reactive power.

    The forecast output is clamped to the device's feasible range first.
    Pass ``q_upstream`` to evaluate the junction-mode formula instead of
    the local one.
    """
    def formula(p_g: float) -> float:
        if q_upstream is None:
            return llma_setpoint(q_load, p_g, device, k)
        return feeder_setpoint(q_load, q_upstream, p_g, device, k)

    q_now = formula(p_current)
    q_ahead = formula(clamp_forecast(device, p_forecast))
    return max(q_now, q_ahead)


def no_action_plan(net: Network, k: float = 0.0, p_outputs: dict = None,
                   tree: RadialTree = None) -> ControlPlan:
    p = _resolved_p(net, p_outputs)
    return ControlPlan(NO_ACTION, float(k), {b: 0.0 for b in p}, p)


def llma_plan(net: Network, k: float = 0.0, p_outputs: dict = None,
              tree: RadialTree = None) -> ControlPlan:
    """Local measurement mode: compensate the device's own bus load."""
    p = _resolved_p(net, p_outputs)
    setpoints = {}
    for dev in net.devices:
        bus = net.bus(dev.bus)
        setpoints[dev.bus] = llma_setpoint(bus.load_q, p[dev.bus], dev, k)
    return ControlPlan(LOCAL, float(k), setpoints, p)


def _q_into_node(flow: powerflow.BranchFlow, bus_id: int) -> float:
    """Signed reactive power a branch delivers into ``bus_id``."""
    if flow.to_bus == bus_id:
        return flow.s_to.imag
    return -flow.s_from.imag


def _incident(result: powerflow.PowerFlowResult, bus_id: int):
    return [f for f in result.branch_flows
            if f.from_bus == bus_id or f.to_bus == bus_id]


def lfma_plan(net: Network, k: float = 0.0, p_outputs: dict = None,
              tree: RadialTree = None) -> ControlPlan:
    """Feeder measurement mode.

    Exactly three network solves, mirroring a measure-act cycle:

    1. no-action solve, to pick each junction device's heaviest incident
       line (largest apparent power at the bus; ties to the lowest line
       index) as the flow it is responsible for;
    2. local-mode solve; leaf devices keep their local setpoint, junction
       devices add the reactive flow still arriving on their chosen line;
    3. solve with the boosted setpoints, then per junction device: if the
       chosen line's reactive flow reversed sign while every other incident
       line kept its direction, shave the overshoot off the setpoint; if
       other lines flipped too, fall back to the local setpoint; otherwise
       keep the boost.
    """
    if tree is None:
        tree = orient_radial(net)
    p = _resolved_p(net, p_outputs)
    k = float(k)

    base = llma_plan(net, k, p_outputs)
    junctions = [d for d in net.devices if not tree.is_leaf(d.bus)]
    if not junctions:
        return ControlPlan(FEEDER, k, dict(base.setpoints), p, dict(base.diagnostics))

    def staged_solve(stage: str, injections: dict) -> powerflow.PowerFlowResult:
        try:
            return powerflow.solve(net, injections, tree=tree)
        except powerflow.NonConvergenceError as exc:
            raise powerflow.NonConvergenceError(
                exc.iterations, exc.mismatch,
                f"during the {stage} stage of the feeder-mode plan") from None

    # solve 1: undispatched network, identify the heaviest incident line
    idle = staged_solve("no-action", powerflow.device_injections(net, None, p))
    chosen = {}
    for dev in junctions:
        flows = _incident(idle, dev.bus)
        chosen[dev.bus] = max(
            flows,
            key=lambda f: (abs(f.s_to) if f.to_bus == dev.bus else abs(f.s_from),
                           -f.index)).index

    # solve 2: local mode everywhere, measure what still arrives
    local = staged_solve("local-setpoint", base.injections(net))
    setpoints = dict(base.setpoints)
    q_arriving = {}
    diagnostics = {}
    for dev in junctions:
        flow = local.branch_flows[chosen[dev.bus]]
        q_up = _q_into_node(flow, dev.bus)
        q_arriving[dev.bus] = q_up
        setpoints[dev.bus] = feeder_setpoint(
            net.bus(dev.bus).load_q, q_up, p[dev.bus], dev, k)

    # solve 3: boosted setpoints, then correct any flow reversal
    boosted_plan = ControlPlan(FEEDER, k, setpoints, p)
    boosted = staged_solve("boosted-setpoint", boosted_plan.injections(net))
    final = dict(setpoints)
    for dev in junctions:
        bus_id = dev.bus
        q_h_up = q_arriving[bus_id]
        flow = boosted.branch_flows[chosen[bus_id]]
        q_i_up = _q_into_node(flow, bus_id)
        others = [f for f in _incident(boosted, bus_id) if f.index != chosen[bus_id]]
        downstream_stable = all(
            _q_into_node(f, bus_id) * _q_into_node(local.branch_flows[f.index], bus_id) > 0.0
            for f in others)
        reversed_up = q_h_up * q_i_up < 0.0
        cap = dev.q_capability(p[bus_id], k)
        if reversed_up and downstream_stable:
            outcome = "trimmed"
            final[bus_id] = min(max(setpoints[bus_id] - abs(q_i_up), 0.0), cap)
        elif reversed_up:
            outcome = "reverted"
            final[bus_id] = base.setpoints[bus_id]
        else:
            outcome = "kept"
        diagnostics[bus_id] = {
            "line": chosen[bus_id],
            "q_local": base.setpoints[bus_id],
            "q_boosted": setpoints[bus_id],
            "q_arriving_local": q_h_up,
            "q_arriving_boosted": q_i_up,
            "outcome": outcome,
        }
    return ControlPlan(FEEDER, k, final, p, diagnostics)


PLANNERS = {
    NO_ACTION: no_action_plan,
    LOCAL: llma_plan,
    FEEDER: lfma_plan,
}


def clamp_forecast(dev, p_forecast: float) -> float:
    """Clamp a forecast active output to the device's feasible range."""
    lo, hi = 0.0, dev.p_rated
    env = dev.envelope
    if hasattr(env, "p_min"):
        lo, hi = max(lo, env.p_min), min(hi, env.p_max)
    return min(max(p_forecast, lo), hi)


def forecast_plan(planner, net: Network, k: float = 0.0,
                  p_current: dict = None, p_forecast: dict = None,
                  tree: RadialTree = None) -> ControlPlan:
    """Forecast-aware wrapper: plan at the current and at the forecast
    operating point, and keep the larger reactive setpoint per device.

    Active output in the resulting plan is always the current one; the
    forecast only widens the reactive dispatch when the next operating
    point offers more capability.
    """
    current = planner(net, k, p_current, tree=tree)
    if p_forecast is None:
        return current
    clamped = {d.bus: clamp_forecast(d, p_forecast.get(d.bus, current.p_outputs[d.bus]))
               for d in net.devices}
    ahead = planner(net, k, clamped, tree=tree)
    merged = {bus: max(current.setpoints[bus], ahead.setpoints[bus])
              for bus in current.setpoints}
    diagnostics = {bus: ("forecast" if ahead.setpoints[bus] > current.setpoints[bus]
                         else "current")
                   for bus in merged}
    return ControlPlan(current.controller, float(k), merged,
                       dict(current.p_outputs), diagnostics)
