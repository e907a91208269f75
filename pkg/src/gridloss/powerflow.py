"""Backward/forward sweep power flow for radial feeders.

The solver treats every non-slack bus as a constant-power node: load drawn
from the case data plus an optional per-bus complex injection (generation
positive). Branch currents are accumulated leaf-to-root from the latest
voltages, then voltages are propagated root-to-leaf; iteration stops once
the worst complex power mismatch at any bus falls below tolerance.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .netmodel import Network, RadialTree, orient_radial

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 100
_COLLAPSE_VOLTAGE = 1e-6


class NonConvergenceError(RuntimeError):
    """Sweep failed to reach the mismatch tolerance."""

    def __init__(self, iterations: int, mismatch: float, detail: str = ""):
        msg = (f"power flow did not converge after {iterations} iterations "
               f"(mismatch {mismatch:.3e} pu)")
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
        self.iterations = iterations
        self.mismatch = mismatch


@dataclass(frozen=True)
class BranchFlow:
    """Power flow on one branch, oriented parent (upstream) to child.

    ``s_from`` enters the branch at the parent end, ``s_to`` leaves it into
    the child bus; the difference is the series loss.
    """

    index: int
    from_bus: int
    to_bus: int
    z: complex
    current: complex
    s_from: complex
    s_to: complex

    @property
    def loss(self) -> complex:
        return self.s_from - self.s_to

    @property
    def mva_from(self) -> float:
        return abs(self.s_from)

    @property
    def mva_to(self) -> float:
        return abs(self.s_to)


@dataclass(frozen=True)
class PowerFlowResult:
    converged: bool
    iterations: int
    mismatch: float
    voltages: dict
    branch_flows: tuple
    slack_power: complex
    base_mva: float

    def voltage(self, bus_id: int) -> complex:
        return self.voltages[bus_id]

    def vmag(self, bus_id: int) -> float:
        return abs(self.voltages[bus_id])

    def min_voltage(self):
        """(magnitude, bus id) of the lowest-voltage bus."""
        bus_id = min(self.voltages, key=lambda b: (abs(self.voltages[b]), b))
        return abs(self.voltages[bus_id]), bus_id

    def total_loss(self) -> float:
        """Active losses in pu, cross-checked between two formulations."""
        if not self.converged:
            raise NonConvergenceError(self.iterations, self.mismatch,
                                      "losses undefined for a diverged solve")
        by_ends = sum(f.loss.real for f in self.branch_flows)
        by_current = sum(abs(f.current) ** 2 * f.z.real for f in self.branch_flows)
        if abs(by_ends - by_current) > 1e-8:
            raise ArithmeticError(
                f"inconsistent loss accounting: {by_ends!r} vs {by_current!r}")
        return by_ends

    def loss_kw(self) -> float:
        return self.total_loss() * self.base_mva * 1000.0

    def flow_into(self, bus_id: int):
        """BranchFlow delivering power into ``bus_id``, or None at the root."""
        for f in self.branch_flows:
            if f.to_bus == bus_id:
                return f
        return None

    def flows_out_of(self, bus_id: int) -> tuple:
        return tuple(f for f in self.branch_flows if f.from_bus == bus_id)


def solve(net: Network, injections: dict = None, *,
          tol: float = DEFAULT_TOLERANCE,
          max_iterations: int = DEFAULT_MAX_ITERATIONS,
          slack_voltage: float = 1.0,
          tree: RadialTree = None) -> PowerFlowResult:
    """Solve the network with optional per-bus complex injections (pu).

    Raises NonConvergenceError when the iteration cap is reached or the
    voltage profile collapses.
    """
    if tree is None:
        tree = orient_radial(net)
    if injections is None:
        injections = {}

    n = net.n_bus
    idx = net.bus_index
    order = [idx(b) for b in tree.order]          # positions, root first
    parent_pos = [-1] * n
    branch_of = [-1] * n                          # branch index feeding each bus
    z = [0j] * len(net.branches)
    for i, br in enumerate(net.branches):
        z[i] = complex(br.r, br.x)
    for bus_id, br_idx in tree.parent_branch.items():
        p = tree.parent[bus_id]
        parent_pos[idx(bus_id)] = idx(p)
        branch_of[idx(bus_id)] = br_idx

    s_net = [0j] * n
    for i, bus in enumerate(net.buses):
        s_net[i] = -complex(bus.load_p, bus.load_q)
    for bus_id, s in injections.items():
        s_net[idx(bus_id)] += complex(s)

    slack_pos = idx(net.slack_bus)
    v = [complex(slack_voltage)] * n
    j_branch = [0j] * len(net.branches)
    mismatch = float("inf")
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        # backward: accumulate branch currents from the latest voltages
        flow_accum = [0j] * n
        for pos in reversed(order):
            if pos == slack_pos:
                continue
            drawn = -(s_net[pos] / v[pos]).conjugate() + flow_accum[pos]
            j_branch[branch_of[pos]] = drawn
            flow_accum[parent_pos[pos]] += drawn

        # forward: update voltages from the root out
        for pos in order:
            if pos == slack_pos:
                continue
            v[pos] = v[parent_pos[pos]] - z[branch_of[pos]] * j_branch[branch_of[pos]]

        bad = next((p for p in range(n)
                    if abs(v[p]) < _COLLAPSE_VOLTAGE or not cmath.isfinite(v[p])), None)
        if bad is not None:
            raise NonConvergenceError(
                iterations, mismatch,
                f"voltage collapse at bus {net.buses[bad].id}")

        # mismatch: net power the branch currents push into each bus must
        # cancel the scheduled injection (the forward sweep makes
        # (v_up - v_down)/z equal j_branch exactly, so no recomputation)
        inflow = [0j] * n
        for bus_id, br_idx in tree.parent_branch.items():
            pos = idx(bus_id)
            inflow[pos] += j_branch[br_idx]
            inflow[parent_pos[pos]] -= j_branch[br_idx]
        mismatch = 0.0
        for pos in range(n):
            if pos == slack_pos:
                continue
            residual = s_net[pos] + v[pos] * inflow[pos].conjugate()
            mismatch = max(mismatch, abs(residual))
        if mismatch < tol:
            converged = True
            break

    if not converged:
        raise NonConvergenceError(iterations, mismatch)

    flows = []
    bus_id_of = [b.id for b in net.buses]
    for i, br in enumerate(net.branches):
        a, b = idx(br.from_bus), idx(br.to_bus)
        if parent_pos[b] == a:
            up, down = a, b
        else:
            up, down = b, a
        current = (v[up] - v[down]) / z[i]
        flows.append(BranchFlow(
            index=i,
            from_bus=bus_id_of[up],
            to_bus=bus_id_of[down],
            z=z[i],
            current=current,
            s_from=v[up] * current.conjugate(),
            s_to=v[down] * current.conjugate(),
        ))

    slack_power = sum(f.s_from for f in flows if f.from_bus == net.slack_bus)
    return PowerFlowResult(
        converged=True,
        iterations=iterations,
        mismatch=mismatch,
        voltages={bus_id_of[p]: v[p] for p in range(n)},
        branch_flows=tuple(flows),
        slack_power=slack_power,
        base_mva=net.base_mva,
    )


def device_injections(net: Network, q_setpoints: dict = None,
                      p_outputs: dict = None) -> dict:
    """Complex injections for the network's devices.

    ``q_setpoints`` maps bus id to reactive output (pu, default 0) and
    ``p_outputs`` overrides each device's snapshot active output.
    """
    q_setpoints = q_setpoints or {}
    p_outputs = p_outputs or {}
    out = {}
    for dev in net.devices:
        p = p_outputs.get(dev.bus, dev.p_out)
        q = q_setpoints.get(dev.bus, 0.0)
        out[dev.bus] = complex(p, q)
    return out
