"""Centralized reactive dispatch baseline.

Projected coordinate descent over the devices' reactive boxes
``[0, (1 - k) * capability]``: visit devices in bus order, line-search each
setpoint with a golden-section scan (every trial point costs one power-flow
solve), and stop when a full sweep no longer moves any setpoint or improves
the losses. If the sweep budget runs out first, or any trial solve
diverges, the baseline falls back to the no-action dispatch and says so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import control, powerflow
from .netmodel import Network, RadialTree, orient_radial

CENTRAL = "opf"
DEFAULT_MAX_SWEEPS = 50
DEFAULT_Q_TOLERANCE = 1e-6      # pu; golden-section bracket width
DEFAULT_STEP_TOLERANCE = 1e-7   # pu; largest per-sweep setpoint move
DEFAULT_LOSS_TOLERANCE = 1e-12  # pu; per-sweep loss improvement

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class OpfStatus(Enum):
    CONVERGED = "converged"
    FELL_BACK = "fell_back"


@dataclass(frozen=True)
class OpfResult:
    """Outcome of the centralized dispatch.

    On fallback the plan is exactly the no-action plan and ``loss`` is the
    no-action loss (NaN if even that state failed to solve).
    """

    status: OpfStatus
    plan: control.ControlPlan
    loss: float         # pu, for the returned plan
    sweeps: int
    evaluations: int

    @property
    def fell_back(self) -> bool:
        return self.status is OpfStatus.FELL_BACK


class _TrialDiverged(Exception):
    pass


def _golden_min(f, lo: float, hi: float, xtol: float):
    """Golden-section minimum of ``f`` on [lo, hi], endpoints included."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best_f, best_x = min(candidates, key=lambda t: t[0])
    return best_x, best_f


def solve_opf(net: Network, k: float = 0.0, p_outputs: dict = None,
              tree: RadialTree = None, *,
              max_sweeps: int = DEFAULT_MAX_SWEEPS,
              q_tolerance: float = DEFAULT_Q_TOLERANCE,
              step_tolerance: float = DEFAULT_STEP_TOLERANCE,
              loss_tolerance: float = DEFAULT_LOSS_TOLERANCE) -> OpfResult:
    """Centrally optimized reactive setpoints, with explicit fallback."""
    if tree is None:
        tree = orient_radial(net)
    k = float(k)
    p = {d.bus: (p_outputs or {}).get(d.bus, d.p_out) for d in net.devices}
    devices = sorted(net.devices, key=lambda d: d.bus)
    caps = {d.bus: d.q_capability(p[d.bus], k) for d in devices}
    q = {d.bus: 0.0 for d in devices}
    evaluations = 0

    def loss_at(qvec: dict) -> float:
        nonlocal evaluations
        evaluations += 1
        injections = {bus: complex(p[bus], qvec[bus]) for bus in qvec}
        try:
            return powerflow.solve(net, injections, tree=tree).total_loss()
        except powerflow.NonConvergenceError:
            raise _TrialDiverged() from None

    def outcome(status: OpfStatus, loss: float, sweeps_done: int) -> OpfResult:
        setpoints = ({bus: 0.0 for bus in q} if status is OpfStatus.FELL_BACK
                     else dict(q))
        plan = control.ControlPlan(
            CENTRAL, k, setpoints, p,
            {"fell_back": status is OpfStatus.FELL_BACK,
             "sweeps": sweeps_done, "evaluations": evaluations})
        return OpfResult(status=status, plan=plan, loss=loss,
                         sweeps=sweeps_done, evaluations=evaluations)

    try:
        base_loss = loss_at(q)
    except _TrialDiverged:
        return outcome(OpfStatus.FELL_BACK, float("nan"), 0)

    current_loss = base_loss
    converged = False
    sweeps_done = 0
    try:
        for sweep in range(max_sweeps):
            sweeps_done = sweep + 1
            moved = 0.0
            improved = 0.0
            for dev in devices:
                hi = caps[dev.bus]
                if hi <= 0.0:
                    continue

                def objective(x, bus=dev.bus):
                    trial = dict(q)
                    trial[bus] = x
                    return loss_at(trial)

                best_x, best_f = _golden_min(objective, 0.0, hi, q_tolerance)
                if best_f < current_loss:
                    moved = max(moved, abs(best_x - q[dev.bus]))
                    improved += current_loss - best_f
                    q[dev.bus] = best_x
                    current_loss = best_f
            if moved < step_tolerance or improved < loss_tolerance:
                converged = True
                break
    except _TrialDiverged:
        return outcome(OpfStatus.FELL_BACK, base_loss, sweeps_done)

    if not converged:
        return outcome(OpfStatus.FELL_BACK, base_loss, sweeps_done)
    return outcome(OpfStatus.CONVERGED, current_loss, sweeps_done)


def opf_plan(net: Network, k: float = 0.0, p_outputs: dict = None,
             tree: RadialTree = None, **options) -> control.ControlPlan:
    """Planner-shaped entry point: the OpfResult's plan only."""
    return solve_opf(net, k, p_outputs, tree, **options).plan
