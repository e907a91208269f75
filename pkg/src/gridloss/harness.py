"""Full-day experiment driver.

Feeds a timestamped operating profile (generation in kW, a global load
scaling factor, optional forecast columns) through any of the controllers
one step at a time, solves the network, and accounts losses and energy.
Night hours can either keep PV plants connected or curtail them entirely
(the wind turbine is never curtailed).

Profiles use kW at the boundary; everything internal stays per-unit on the
network's MVA base.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from datetime import datetime, time, timedelta

from . import control, opf, powerflow
from .netmodel import DeviceKind, Network, orient_radial

CONNECTED = "connected"
DISCONNECTED = "disconnected"
NIGHT_POLICIES = (CONNECTED, DISCONNECTED)

FORECAST_NONE = "none"
FORECAST_FILE = "file"
FORECAST_PERSISTENCE = "persistence"
FORECAST_MODES = (FORECAST_NONE, FORECAST_FILE, FORECAST_PERSISTENCE)

NIGHT_START = time(20, 0)
NIGHT_END = time(5, 0)

CONTROLLERS = tuple(control.PLANNERS) + (opf.CENTRAL,)


class ProfileSchemaError(ValueError):
    """Profile CSV does not match the documented schema."""


@dataclass(frozen=True)
class TimeSeriesProfile:
    """Validated operating profile on a uniform time grid.

    ``generation`` and ``forecast`` map device bus ids to kW series;
    ``kinds`` records which column prefix (pv/wind) named each bus.
    """

    timestamps: tuple
    generation: dict
    kinds: dict
    load_scale: tuple
    forecast: dict
    step: timedelta

    @property
    def n_rows(self) -> int:
        return len(self.timestamps)

    @property
    def step_hours(self) -> float:
        return self.step.total_seconds() / 3600.0

    def has_forecast_for(self, bus: int) -> bool:
        return bus in self.forecast


def _fill_missing(values: list, column: str) -> list:
    """Linear interpolation for interior gaps; edges take the nearest value."""
    known = [i for i, v in enumerate(values) if v is not None]
    if not known:
        raise ProfileSchemaError(f"column {column!r} has no values at all")
    filled = list(values)
    first, last = known[0], known[-1]
    for i in range(first):
        filled[i] = values[first]
    for i in range(last + 1, len(values)):
        filled[i] = values[last]
    for lo, hi in zip(known, known[1:]):
        for i in range(lo + 1, hi):
            frac = (i - lo) / (hi - lo)
            filled[i] = values[lo] + frac * (values[hi] - values[lo])
    return filled


def _column_bus(name: str) -> tuple:
    """(kind, bus, is_forecast) for a generation column name, else None."""
    base = name
    is_forecast = name.startswith("fc_")
    if is_forecast:
        base = name[3:]
    for prefix, kind in (("pv_", DeviceKind.PV), ("wind_", DeviceKind.DFIG)):
        if base.startswith(prefix):
            try:
                return kind, int(base[len(prefix):]), is_forecast
            except ValueError:
                raise ProfileSchemaError(
                    f"column {name!r} does not name a bus id") from None
    return None


def ingest_timeseries(text: str) -> TimeSeriesProfile:
    """Parse and validate a profile CSV (see the module docstring)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ProfileSchemaError("profile file is empty") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "timestamp":
        raise ProfileSchemaError("first column must be 'timestamp'")
    if "load_scale" not in header:
        raise ProfileSchemaError("profile needs a 'load_scale' column")

    value_cols = header[1:]
    gen_cols, fc_cols = {}, {}
    for name in value_cols:
        if name == "load_scale":
            continue
        parsed = _column_bus(name)
        if parsed is None:
            raise ProfileSchemaError(f"unrecognized column {name!r}")
        kind, bus, is_forecast = parsed
        target = fc_cols if is_forecast else gen_cols
        if bus in target:
            raise ProfileSchemaError(f"duplicate column for bus {bus}")
        target[bus] = (name, kind)

    timestamps = []
    raw = {name: [] for name in value_cols}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ProfileSchemaError(
                f"row {lineno}: expected {len(header)} cells, got {len(row)}")
        try:
            timestamps.append(datetime.fromisoformat(row[0].strip()))
        except ValueError:
            raise ProfileSchemaError(
                f"row {lineno}: bad timestamp {row[0]!r}") from None
        for name, cell in zip(value_cols, row[1:]):
            cell = cell.strip()
            if not cell:
                raw[name].append(None)
                continue
            try:
                raw[name].append(float(cell))
            except ValueError:
                raise ProfileSchemaError(
                    f"row {lineno}: bad number {cell!r} in {name!r}") from None

    if not timestamps:
        raise ProfileSchemaError("profile has no data rows")
    if len(timestamps) < 2:
        raise ProfileSchemaError("profile needs at least two rows")
    steps = [b - a for a, b in zip(timestamps, timestamps[1:])]
    if any(s.total_seconds() <= 0 for s in steps):
        raise ProfileSchemaError("timestamps must be strictly increasing")
    if any(abs((s - steps[0]).total_seconds()) > 1e-6 for s in steps):
        raise ProfileSchemaError("timestep must be uniform")

    filled = {name: _fill_missing(vals, name) for name, vals in raw.items()}
    for name, vals in filled.items():
        if name == "load_scale":
            bad = next((v for v in vals if v < 0.0), None)
            if bad is not None:
                raise ProfileSchemaError(f"negative load_scale {bad}")
        else:
            bad = next((v for v in vals if v < 0.0), None)
            if bad is not None:
                raise ProfileSchemaError(f"negative generation in {name!r}: {bad}")

    generation = {bus: tuple(filled[name]) for bus, (name, _) in gen_cols.items()}
    forecast = {bus: tuple(filled[name]) for bus, (name, _) in fc_cols.items()}
    kinds = {bus: kind for bus, (_, kind) in gen_cols.items()}
    for bus, (name, kind) in fc_cols.items():
        if bus in kinds and kinds[bus] is not kind:
            raise ProfileSchemaError(
                f"forecast column {name!r} disagrees with the actual column's kind")

    return TimeSeriesProfile(
        timestamps=tuple(timestamps), generation=generation, kinds=kinds,
        load_scale=tuple(filled["load_scale"]), forecast=forecast,
        step=steps[0])


def resample(profile: TimeSeriesProfile, step_minutes: float) -> TimeSeriesProfile:
    """Linearly resample to a finer uniform grid, preserving endpoints.

    The requested step must divide the profile's step evenly; N rows become
    (N - 1) * factor + 1 rows.
    """
    old_minutes = profile.step.total_seconds() / 60.0
    factor = old_minutes / step_minutes
    if factor < 1.0 - 1e-9 or abs(factor - round(factor)) > 1e-9:
        raise ProfileSchemaError(
            f"step {step_minutes} min must evenly divide the profile's "
            f"{old_minutes:g} min")
    factor = int(round(factor))
    if factor == 1:
        return profile

    n_new = (profile.n_rows - 1) * factor + 1
    new_step = profile.step / factor
    stamps = tuple(profile.timestamps[0] + i * new_step for i in range(n_new))

    def stretch(series: tuple) -> tuple:
        out = []
        for i in range(n_new):
            lo, rem = divmod(i, factor)
            if rem == 0:
                out.append(series[lo])
            else:
                frac = rem / factor
                out.append(series[lo] + frac * (series[lo + 1] - series[lo]))
        return tuple(out)

    return TimeSeriesProfile(
        timestamps=stamps,
        generation={b: stretch(s) for b, s in profile.generation.items()},
        kinds=dict(profile.kinds),
        load_scale=stretch(profile.load_scale),
        forecast={b: stretch(s) for b, s in profile.forecast.items()},
        step=new_step)


def is_night(stamp: datetime, start: time = NIGHT_START,
             end: time = NIGHT_END) -> bool:
    t = stamp.time()
    if start > end:  # window wraps midnight
        return t >= start or t < end
    return start <= t < end


@dataclass(frozen=True)
class StepRecord:
    timestamp: datetime
    loss_kw: float          # NaN when the solve diverged
    min_voltage: float      # NaN when the solve diverged
    min_voltage_bus: int    # -1 when the solve diverged
    setpoints_kvar: dict    # device bus -> dispatched reactive power
    curtailed: tuple        # PV buses removed by the night policy
    fell_back: bool
    diverged: bool


@dataclass(frozen=True)
class DayReport:
    controller: str
    k: float
    night_policy: str
    forecast: str
    avg_loss_kw: float
    energy_loss_kwh: float
    trace: tuple
    fallback_count: int
    warning_count: int
    step_hours: float
    solver_tolerance: float
    solver_max_iterations: int


def _scaled_network(net: Network, factor: float) -> Network:
    buses = tuple(replace(b, load_p=b.load_p * factor, load_q=b.load_q * factor)
                  for b in net.buses)
    return replace(net, buses=buses)


def clamped_generation(dev, kw: float, base_kw: float) -> float:
    """kW to per-unit, clamped to the device's feasible active range."""
    return control.clamp_forecast(dev, kw / base_kw)


def run_day(net: Network, profile: TimeSeriesProfile,
            controller: str = control.NO_ACTION, k: float = 0.0,
            forecast: str = FORECAST_NONE, night_policy: str = CONNECTED, *,
            night_start: time = NIGHT_START, night_end: time = NIGHT_END,
            tolerance: float = powerflow.DEFAULT_TOLERANCE,
            max_iterations: int = powerflow.DEFAULT_MAX_ITERATIONS) -> DayReport:
    """Run one controller over the whole profile and aggregate losses.

    Steps whose final solve diverges are kept in the trace with NaN losses,
    excluded from the aggregates, and counted as warnings.
    """
    if controller not in CONTROLLERS:
        raise ValueError(f"unknown controller {controller!r}")
    if night_policy not in NIGHT_POLICIES:
        raise ValueError(f"unknown night policy {night_policy!r}")
    if forecast not in FORECAST_MODES:
        raise ValueError(f"unknown forecast mode {forecast!r}")
    if not 0.0 <= float(k) <= 1.0:
        raise ValueError(f"reserve coefficient must be in [0, 1], got {k}")
    if forecast == FORECAST_FILE and not profile.forecast:
        raise ProfileSchemaError("profile has no forecast columns")
    if forecast != FORECAST_NONE and controller == opf.CENTRAL:
        raise ValueError("forecast adjustment applies to the decentralized "
                         "controllers, not the centralized baseline")
    device_kinds = {d.bus: d.kind for d in net.devices}
    for bus, kind in profile.kinds.items():
        if device_kinds.get(bus) is not kind:
            raise ProfileSchemaError(
                f"profile column for bus {bus} has no matching "
                f"{kind.value} device in the network")

    tree = orient_radial(net)
    base_kw = net.base_mva * 1000.0
    records = []
    fallbacks = 0
    warnings = 0

    for i, stamp in enumerate(profile.timestamps):
        step_net = _scaled_network(net, profile.load_scale[i])
        night = is_night(stamp, night_start, night_end)

        curtailed = ()
        devices = net.devices
        if night_policy == DISCONNECTED and night:
            curtailed = tuple(sorted(d.bus for d in devices
                                     if d.kind is DeviceKind.PV))
            devices = tuple(d for d in devices if d.kind is not DeviceKind.PV)
            step_net = step_net.with_devices(devices)

        p_now = {}
        for dev in devices:
            if dev.bus in profile.generation:
                p_now[dev.bus] = clamped_generation(
                    dev, profile.generation[dev.bus][i], base_kw)
            else:
                p_now[dev.bus] = dev.p_out

        fell_back = False
        if controller == opf.CENTRAL:
            result = opf.solve_opf(step_net, k, p_now, tree)
            plan = result.plan
            fell_back = result.fell_back
        elif forecast == FORECAST_NONE:
            plan = control.PLANNERS[controller](step_net, k, p_now, tree=tree)
        else:
            if forecast == FORECAST_PERSISTENCE:
                p_ahead = dict(p_now)
            else:
                p_ahead = {dev.bus: (clamped_generation(dev, profile.forecast[dev.bus][i],
                                                 base_kw)
                                     if dev.bus in profile.forecast
                                     else p_now[dev.bus])
                           for dev in devices}
            plan = control.forecast_plan(control.PLANNERS[controller],
                                         step_net, k, p_now, p_ahead, tree=tree)
        if fell_back:
            fallbacks += 1

        setpoints_kvar = {bus: q * base_kw for bus, q in sorted(plan.setpoints.items())}
        try:
            solution = powerflow.solve(step_net, plan.injections(step_net),
                                       tol=tolerance, max_iterations=max_iterations,
                                       tree=tree)
            records.append(StepRecord(
                timestamp=stamp, loss_kw=solution.loss_kw(),
                min_voltage=solution.min_voltage()[0],
                min_voltage_bus=solution.min_voltage()[1],
                setpoints_kvar=setpoints_kvar, curtailed=curtailed,
                fell_back=fell_back, diverged=False))
        except powerflow.NonConvergenceError:
            warnings += 1
            records.append(StepRecord(
                timestamp=stamp, loss_kw=math.nan, min_voltage=math.nan,
                min_voltage_bus=-1, setpoints_kvar=setpoints_kvar,
                curtailed=curtailed, fell_back=fell_back, diverged=True))

    step_hours = profile.step_hours
    good = [r for r in records if not r.diverged]
    energy = sum(r.loss_kw * step_hours for r in good)
    hours = len(good) * step_hours
    avg = energy / hours if hours > 0.0 else math.nan

    return DayReport(
        controller=controller, k=float(k), night_policy=night_policy,
        forecast=forecast, avg_loss_kw=avg, energy_loss_kwh=energy,
        trace=tuple(records), fallback_count=fallbacks,
        warning_count=warnings, step_hours=step_hours,
        solver_tolerance=tolerance, solver_max_iterations=max_iterations)
