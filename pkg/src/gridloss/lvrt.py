"""Low-voltage ride-through: grid-code support curve and fault surrogate.

The reactive-current requirement follows the usual grid-code shape: no
support while voltage stays above 0.9 pu, a linear ramp to full reactive
current at 0.5 pu, full current held down to 0.2 pu, and permission to
disconnect below that. The curve boundaries and slope are configurable
through GridCodeCurve.

Faults are studied quasi-statically rather than with electromagnetic
transients. A sag at one bus is mapped onto the rest of the feeder through
the ratio of shared series impedance on the paths back to the source;
devices respond with the grid-code current drawn from their full
capability (any reserve held back in normal operation is released);
post-fault voltages relax back first-order, with a time constant that
shrinks as the fleet's unscheduled reactive headroom grows. The recovery
figure this produces is an ordering proxy, not a millisecond prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import powerflow
from .control import ControlPlan
from .netmodel import Network, orient_radial

RECOVERY_THRESHOLD = 0.9   # feeder counts as recovered at this minimum voltage
TAU_SCALE = 0.02           # s·pu; relaxation constant per unit of headroom
HEADROOM_FLOOR = 1e-6      # pu; keeps the time constant finite
MAX_TRACE_SAMPLES = 20000
_RATIO_SLACK = 1e-12


class RideThroughZone(Enum):
    NORMAL = "normal"
    SUPPORT = "support"
    FULL_SUPPORT = "full_support"
    TRIP_ALLOWED = "trip_allowed"


@dataclass(frozen=True)
class GridCodeCurve:
    """Voltage-region boundaries of the reactive-current requirement."""

    v_normal_low: float = 0.9
    v_full_low: float = 0.5
    v_trip_low: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.v_trip_low < self.v_full_low < self.v_normal_low < 1.0:
            raise ValueError(
                f"curve boundaries must satisfy 0 < {self.v_trip_low} < "
                f"{self.v_full_low} < {self.v_normal_low} < 1")

    def zone(self, voltage: float) -> RideThroughZone:
        if voltage >= self.v_normal_low:
            return RideThroughZone.NORMAL
        if voltage >= self.v_full_low:
            return RideThroughZone.SUPPORT
        if voltage >= self.v_trip_low:
            return RideThroughZone.FULL_SUPPORT
        return RideThroughZone.TRIP_ALLOWED


DEFAULT_CURVE = GridCodeCurve()


def ride_through_zone(voltage: float, curve: GridCodeCurve = DEFAULT_CURVE):
    return curve.zone(voltage)


def required_reactive_current(voltage: float,
                              curve: GridCodeCurve = DEFAULT_CURVE) -> float:
    """Required injected reactive current as a fraction of nominal current."""
    if voltage >= curve.v_normal_low:
        return 0.0
    if voltage >= curve.v_full_low:
        return (curve.v_normal_low - voltage) / (curve.v_normal_low - curve.v_full_low)
    return 1.0


class ScenarioFormatError(ValueError):
    """Malformed fault scenario text."""


@dataclass(frozen=True)
class FaultScenario:
    bus: int
    sag: float              # fractional voltage depression at the faulted bus
    t_start: float = 0.0    # s
    duration: float = 0.15  # s
    dt: float = 0.01        # s

    def __post_init__(self):
        if not 0.0 <= self.sag < 1.0:
            raise ScenarioFormatError(f"sag must be in [0, 1), got {self.sag}")
        if self.t_start < 0.0:
            raise ScenarioFormatError(f"t_start must be non-negative, got {self.t_start}")
        if self.duration <= 0.0:
            raise ScenarioFormatError(f"duration must be positive, got {self.duration}")
        if self.dt <= 0.0:
            raise ScenarioFormatError(f"dt must be positive, got {self.dt}")

    @property
    def t_clear(self) -> float:
        return self.t_start + self.duration


def parse_scenario(text: str) -> FaultScenario:
    """Parse ``key = value`` scenario text ('#' or '%' start comments)."""
    fields = {}
    casts = {"bus": int, "sag": float, "t_start": float,
             "duration": float, "dt": float}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split("%", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in casts:
            raise ScenarioFormatError(f"line {lineno}: unknown key {key!r}")
        if key in fields:
            raise ScenarioFormatError(f"line {lineno}: duplicate key {key!r}")
        try:
            fields[key] = casts[key](value)
        except ValueError:
            raise ScenarioFormatError(
                f"line {lineno}: bad value {value!r} for {key}") from None
    for required in ("bus", "sag"):
        if required not in fields:
            raise ScenarioFormatError(f"scenario is missing {required!r}")
    return FaultScenario(**fields)


@dataclass(frozen=True)
class DeviceFaultResponse:
    """Steady during-fault response of one device."""

    bus: int
    voltage: float          # retained voltage at the device bus, pu
    zone: RideThroughZone
    current_ratio: float    # injected Iq/In while the fault is on
    q_capability: float     # full capability with reserves released, pu
    q_injected: float       # pu
    tripped: bool


@dataclass(frozen=True)
class TracePoint:
    t: float
    v_min: float
    ratios: tuple           # Iq/In per device, in network device order
    compliant: bool


@dataclass(frozen=True)
class FaultStudy:
    scenario: FaultScenario
    plan: ControlPlan
    severe: bool            # pre-fault state did not converge
    v_pre: dict             # bus -> voltage magnitude before the fault
    v_during: dict          # bus -> retained voltage during the fault
    responses: tuple        # DeviceFaultResponse per device
    headroom: float         # pu of full capability not scheduled by the plan
    tau: float              # s
    v_dip: float            # minimum retained voltage during the fault
    v_settled: float        # post-fault steady minimum voltage
    max_voltage_deviation: float
    recovery_time: float    # s after clearing, on the dt grid; inf if never
    trace: tuple            # TracePoint samples from t = 0

    @property
    def recovered(self) -> bool:
        return math.isfinite(self.recovery_time)


def _path_impedance(net: Network, tree, bus_id: int) -> complex:
    z = 0j
    b = bus_id
    while b != tree.slack:
        br = net.branches[tree.parent_branch[b]]
        z += complex(br.r, br.x)
        b = tree.parent[b]
    return z


def sag_attenuation(net: Network, fault_bus: int, bus_id: int, tree=None) -> float:
    """Fraction of the faulted bus's sag seen at another bus.

    Ratio of the series impedance shared by the two buses' source paths to
    the faulted bus's whole source path: 1 at and below the fault, falling
    toward 0 at the source and on other laterals.
    """
    if tree is None:
        tree = orient_radial(net)
    z_total = _path_impedance(net, tree, fault_bus)
    if abs(z_total) == 0.0:
        return 1.0 if bus_id == fault_bus else 0.0
    shared_at = {fault_bus: z_total}
    b, z = fault_bus, z_total
    while b != tree.slack:
        br = net.branches[tree.parent_branch[b]]
        z -= complex(br.r, br.x)
        b = tree.parent[b]
        shared_at[b] = z
    b = bus_id
    while b not in shared_at:
        b = tree.parent[b]
    return abs(shared_at[b]) / abs(z_total)


def simulate_fault(net: Network, scenario: FaultScenario, plan: ControlPlan, *,
                   curve: GridCodeCurve = DEFAULT_CURVE,
                   tau_scale: float = TAU_SCALE,
                   recovery_threshold: float = RECOVERY_THRESHOLD) -> FaultStudy:
    """Run the quasi-static fault study with the given dispatch in force.

    A pre-fault state that fails to converge is reported as a severe
    outcome (empty traces, infinite recovery), not raised.
    """
    tree = orient_radial(net)
    if scenario.bus not in {b.id for b in net.buses}:
        raise ScenarioFormatError(f"scenario bus {scenario.bus} is not in the network")

    try:
        pre = powerflow.solve(net, plan.injections(net), tree=tree)
    except powerflow.NonConvergenceError:
        nan = float("nan")
        return FaultStudy(
            scenario=scenario, plan=plan, severe=True, v_pre={}, v_during={},
            responses=(), headroom=nan, tau=nan, v_dip=nan, v_settled=nan,
            max_voltage_deviation=nan, recovery_time=math.inf, trace=())

    v_pre = {b: abs(v) for b, v in pre.voltages.items()}
    v_during = {}
    for bus in net.buses:
        atten = sag_attenuation(net, scenario.bus, bus.id, tree)
        v_during[bus.id] = v_pre[bus.id] * (1.0 - scenario.sag * atten)

    responses = []
    plan_ratio = {}
    for dev in net.devices:
        v = v_during[dev.bus]
        zone = curve.zone(v)
        required = required_reactive_current(v, curve)
        cap_full = dev.q_capability(plan.p_outputs.get(dev.bus, dev.p_out), 0.0)
        scheduled = plan.setpoints.get(dev.bus, 0.0)
        plan_ratio[dev.bus] = min(scheduled / cap_full, 1.0) if cap_full > 0.0 else 0.0
        tripped = zone is RideThroughZone.TRIP_ALLOWED
        # a remote shallow sag never curtails the scheduled output; the
        # grid-code requirement only raises the injection above it
        ratio = 0.0 if tripped else max(required, plan_ratio[dev.bus])
        responses.append(DeviceFaultResponse(
            bus=dev.bus, voltage=v, zone=zone, current_ratio=ratio,
            q_capability=cap_full, q_injected=ratio * cap_full, tripped=tripped))

    # forecast-boosted plans may schedule past today's capability; the
    # negative terms are kept so extra scheduling always eats headroom
    headroom = sum(r.q_capability - plan.setpoints.get(r.bus, 0.0)
                   for r in responses)
    if headroom >= HEADROOM_FLOOR:
        tau = tau_scale / headroom
    else:
        # C1 extension of the hyperbola below the floor: finite, and still
        # strictly decreasing in headroom once the fleet is over-committed,
        # so deeper over-scheduling always lengthens the time constant
        tau = (tau_scale / HEADROOM_FLOOR) * (2.0 - headroom / HEADROOM_FLOOR)

    v_dip = min(v_during.values())
    v_settled = min(v_pre.values())
    max_dev = max(v_pre[b] - v_during[b] for b in v_pre)

    def bus_voltage(bus_id: int, t: float) -> float:
        if t < scenario.t_start:
            return v_pre[bus_id]
        if t < scenario.t_clear:
            return v_during[bus_id]
        gap = v_pre[bus_id] - v_during[bus_id]
        return v_pre[bus_id] - gap * math.exp(-(t - scenario.t_clear) / tau)

    if v_dip >= recovery_threshold:
        recovery_exact = 0.0
    elif v_settled <= recovery_threshold:
        recovery_exact = math.inf
    else:
        recovery_exact = tau * math.log((v_settled - v_dip)
                                        / (v_settled - recovery_threshold))
    if math.isfinite(recovery_exact):
        recovery_time = math.ceil(max(recovery_exact, 0.0) / scenario.dt) * scenario.dt
    else:
        recovery_time = math.inf

    horizon = scenario.t_clear + (recovery_time if math.isfinite(recovery_time)
                                  else 5.0 * tau) + 2.0 * scenario.dt
    steps = min(int(math.ceil(horizon / scenario.dt)) + 1, MAX_TRACE_SAMPLES)
    trace = []
    for i in range(steps):
        t = i * scenario.dt
        in_or_after_fault = t >= scenario.t_start
        v_by_bus = {b: bus_voltage(b, t) for b in v_pre}
        ratios = []
        compliant = True
        for dev, resp in zip(net.devices, responses):
            if resp.tripped and in_or_after_fault:
                ratios.append(0.0)
                continue  # disconnection is permitted in the trip zone
            req_now = required_reactive_current(v_by_bus[dev.bus], curve)
            ratio = max(req_now, plan_ratio[dev.bus])
            ratios.append(ratio)
            if ratio + _RATIO_SLACK < req_now:
                compliant = False
        trace.append(TracePoint(t=t, v_min=min(v_by_bus.values()),
                                ratios=tuple(ratios), compliant=compliant))

    return FaultStudy(
        scenario=scenario, plan=plan, severe=False, v_pre=v_pre,
        v_during=v_during, responses=tuple(responses), headroom=headroom,
        tau=tau, v_dip=v_dip, v_settled=v_settled,
        max_voltage_deviation=max_dev, recovery_time=recovery_time,
        trace=tuple(trace))
