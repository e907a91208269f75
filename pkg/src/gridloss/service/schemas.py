"""Request/response models for the simulation service.

Requests carry file *content* (case text, profile CSV, scenario text), not
paths, so the service stays stateless and the CLI can run against a remote
instance exactly as it runs in-process.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

CONTROLLER_NAMES = ("noaction", "llma", "lfma", "opf")
FORECAST_NAMES = ("none", "file", "persistence")
NIGHT_NAMES = ("connected", "disconnected")


class SolverOptions(BaseModel):
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_iterations: int = Field(default=100, ge=1)


class PowerFlowRequest(BaseModel):
    case_text: str
    controller: str = "noaction"
    k: List[float] = Field(default_factory=lambda: [0.0])
    solver: SolverOptions = Field(default_factory=SolverOptions)


class BusRow(BaseModel):
    bus: int
    v_mag: float
    v_angle_deg: float


class BranchRow(BaseModel):
    index: int
    from_bus: int
    to_bus: int
    p_from_kw: float
    q_from_kvar: float
    p_to_kw: float
    q_to_kvar: float
    loss_kw: float


class PowerFlowRun(BaseModel):
    controller: str
    k: float
    setpoints_kvar: Dict[int, float]
    iterations: int
    total_loss_kw: float
    min_voltage: float
    min_voltage_bus: int
    slack_p_kw: float
    slack_q_kvar: float
    fell_back: Optional[bool] = None
    buses: List[BusRow]
    branches: List[BranchRow]


class PowerFlowResponse(BaseModel):
    case_name: str
    base_mva: float
    solver: SolverOptions
    runs: List[PowerFlowRun]


class DayRequest(BaseModel):
    case_text: str
    profile_csv: str
    controller: str = "noaction"
    k: List[float] = Field(default_factory=lambda: [0.0])
    forecast: str = "none"
    night_policy: str = "connected"
    solver: SolverOptions = Field(default_factory=SolverOptions)


class DayTraceRow(BaseModel):
    timestamp: str
    loss_kw: Optional[float]        # null when the step diverged
    min_voltage: Optional[float]
    min_voltage_bus: Optional[int]
    setpoints_kvar: Dict[int, float]
    curtailed: List[int]
    fell_back: bool
    diverged: bool


class DayRun(BaseModel):
    controller: str
    k: float
    night_policy: str
    forecast: str
    avg_loss_kw: Optional[float]    # null when no step converged
    energy_loss_kwh: float
    fallback_count: int
    warning_count: int
    step_hours: float
    trace: List[DayTraceRow]


class DayResponse(BaseModel):
    case_name: str
    base_mva: float
    solver: SolverOptions
    runs: List[DayRun]


class FaultRequest(BaseModel):
    case_text: str
    scenario_text: str
    controller: str = "noaction"
    k: List[float] = Field(default_factory=lambda: [0.0])
    forecast: str = "none"
    profile_csv: Optional[str] = None   # first row sets the operating point
    solver: SolverOptions = Field(default_factory=SolverOptions)


class DeviceResponseRow(BaseModel):
    bus: int
    voltage: float
    zone: str
    current_ratio: float
    q_capability_kvar: float
    q_injected_kvar: float
    tripped: bool


class FaultTraceRow(BaseModel):
    t: float
    v_min: float
    ratios: List[float]
    compliant: bool


class FaultRun(BaseModel):
    controller: str
    k: float
    forecast: str
    severe: bool
    v_dip: Optional[float]
    v_settled: Optional[float]
    max_voltage_deviation: Optional[float]
    headroom_kvar: Optional[float]
    tau_s: Optional[float]
    recovery_time_s: Optional[float]    # null when the feeder never recovers
    recovered: bool
    device_buses: List[int]
    devices: List[DeviceResponseRow]
    trace: List[FaultTraceRow]


class FaultResponse(BaseModel):
    case_name: str
    base_mva: float
    scenario: Dict[str, float]
    solver: SolverOptions
    runs: List[FaultRun]


class ValidateRequest(BaseModel):
    case_text: str


class ValidateResponse(BaseModel):
    valid: bool
    error: Optional[str] = None
    case_name: Optional[str] = None
    bus_count: Optional[int] = None
    branch_count: Optional[int] = None
    device_count: Optional[int] = None
    slack_bus: Optional[int] = None
    leaves: Optional[List[int]] = None


class ErrorBody(BaseModel):
    kind: str    # exception class name, e.g. "CaseFormatError"
    message: str
