"""Loss studies for radial distribution feeders.

Core pieces: a case-file model of the feeder (netmodel), a sweep-based
power-flow solver (powerflow), reactive-capability envelopes for solar and
wind plants (capability), decentralized setpoint controllers and a central
optimizing baseline (control, opf), voltage-sag ride-through studies
(lvrt), and a daily-profile harness (harness). The service subpackage and
cli module expose the same operations over HTTP and the command line.
"""

from .capability import (CapabilityDomainError, DfigEnvelope, PvEnvelope,
                         dfig_q_limit, load_dfig_curve, pv_q_limit, q_limit)
from .control import (ControlPlan, PLANNERS, evaluate_plan, feeder_setpoint,
                      forecast_adjusted_setpoint, forecast_plan, lfma_plan,
                      llma_plan, llma_setpoint, no_action_plan)
from .harness import (DayReport, ProfileSchemaError, StepRecord,
                      TimeSeriesProfile, ingest_timeseries, resample, run_day)
from .lvrt import (FaultScenario, FaultStudy, GridCodeCurve,
                   ScenarioFormatError, parse_scenario,
                   required_reactive_current, ride_through_zone,
                   simulate_fault)
from .netmodel import (Branch, Bus, CaseFormatError, CaseSemanticError,
                       Device, DeviceKind, Network, RadialTree,
                       TopologyError, default_dfig_envelope, orient_radial,
                       parse_case, serialize_case)
from .opf import OpfResult, OpfStatus, opf_plan, solve_opf
from .powerflow import (BranchFlow, NonConvergenceError, PowerFlowResult,
                        device_injections, solve)

__version__ = "1.0.0"

__all__ = [
    "Branch", "BranchFlow", "Bus", "CapabilityDomainError",
    "CaseFormatError", "CaseSemanticError", "ControlPlan", "DayReport",
    "Device", "DeviceKind", "DfigEnvelope", "FaultScenario", "FaultStudy",
    "GridCodeCurve", "Network", "NonConvergenceError", "OpfResult",
    "OpfStatus", "PLANNERS", "PowerFlowResult", "ProfileSchemaError",
    "PvEnvelope", "RadialTree", "ScenarioFormatError", "StepRecord",
    "TimeSeriesProfile", "TopologyError", "default_dfig_envelope",
    "device_injections", "dfig_q_limit", "evaluate_plan", "feeder_setpoint",
    "forecast_adjusted_setpoint", "forecast_plan", "ingest_timeseries",
    "lfma_plan", "llma_plan", "llma_setpoint", "load_dfig_curve",
    "no_action_plan", "opf_plan", "orient_radial", "parse_case",
    "parse_scenario", "pv_q_limit", "q_limit", "required_reactive_current",
    "resample", "ride_through_zone", "run_day", "serialize_case",
    "simulate_fault", "solve", "solve_opf",
]
