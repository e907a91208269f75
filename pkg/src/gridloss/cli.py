"""Command-line front end.

Every subcommand builds the same request the HTTP service accepts. By
default it is answered in-process; with ``--server URL`` it is POSTed to a
running instance and the response is used verbatim, so outputs are
identical either way. Reports go to stdout as JSON, or into the directory
named by ``--out`` as JSON plus CSV extracts.

Exit codes: 0 success, 1 solver or runtime failure, 2 usage or input error.
Set GRIDLOSS_LOG=debug (or info, warning, ...) to log progress to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

CONTROLLER_CHOICES = ("noaction", "llma", "lfma", "opf")
FORECAST_CHOICES = ("none", "file", "persistence")
NIGHT_CHOICES = ("connected", "disconnected")

log = logging.getLogger("gridloss")


class CliError(Exception):
    """A failure with a ready-made exit code."""

    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _setup_logging() -> None:
    level_name = os.environ.get("GRIDLOSS_LOG", "").strip().upper()
    if not level_name:
        return
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _read(path: str) -> str:
    return Path(path).read_text()


def _parse_k(text: str) -> list:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise CliError(f"--k expects comma-separated numbers, got {text!r}",
                       EXIT_USAGE) from None
    if not values:
        raise CliError("--k must name at least one reserve coefficient",
                       EXIT_USAGE)
    return values


def _jsonable(obj):
    """Deep-copy with non-finite floats replaced by null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {key: _jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(item) for item in obj]
    return obj


def _dump_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Request execution: in-process by default, HTTP when --server is given.

def _local(op: str, payload: dict) -> dict:
    from .service import handlers, schemas
    table = {
        "powerflow": (schemas.PowerFlowRequest, handlers.handle_powerflow),
        "day": (schemas.DayRequest, handlers.handle_day),
        "fault": (schemas.FaultRequest, handlers.handle_fault),
        "validate": (schemas.ValidateRequest, handlers.handle_validate),
    }
    request_cls, handler = table[op]
    response = handler(request_cls(**payload))
    # Round-trip through the JSON serializer so in-process results are the
    # same document a remote server would send (JSON object keys are strings).
    return json.loads(response.model_dump_json())


def _remote(server: str, op: str, payload: dict) -> dict:
    import httpx
    url = server.rstrip("/") + "/" + op
    log.info("POST %s", url)
    try:
        resp = httpx.post(url, json=payload, timeout=600.0)
    except httpx.HTTPError as exc:
        raise CliError(f"request to {url} failed: {exc}", EXIT_RUNTIME)
    if resp.status_code >= 400:
        try:
            detail = resp.json()
            message = detail.get("message") or detail.get("detail") or resp.text
        except ValueError:
            message = resp.text
        code = EXIT_USAGE if resp.status_code in (400, 422) else EXIT_RUNTIME
        raise CliError(f"server returned {resp.status_code}: {message}", code)
    return resp.json()


def _call(server, op: str, payload: dict) -> dict:
    if server:
        return _remote(server, op, payload)
    return _local(op, payload)


# ---------------------------------------------------------------------------
# Report emission.

def _csv_views(op: str, payload: dict):
    runs = payload.get("runs", [])
    if op == "powerflow":
        bus_rows, branch_rows = [], []
        for run in runs:
            tag = [run["controller"], run["k"]]
            for row in run["buses"]:
                bus_rows.append(tag + [row["bus"], row["v_mag"],
                                       row["v_angle_deg"]])
            for row in run["branches"]:
                branch_rows.append(tag + [row["index"], row["from_bus"],
                                          row["to_bus"], row["p_from_kw"],
                                          row["q_from_kvar"], row["p_to_kw"],
                                          row["q_to_kvar"], row["loss_kw"]])
        yield ("powerflow_buses.csv",
               ["controller", "k", "bus", "v_mag", "v_angle_deg"], bus_rows)
        yield ("powerflow_branches.csv",
               ["controller", "k", "index", "from_bus", "to_bus", "p_from_kw",
                "q_from_kvar", "p_to_kw", "q_to_kvar", "loss_kw"], branch_rows)
    elif op == "day":
        summary_cols = ["controller", "k", "night_policy", "forecast",
                        "avg_loss_kw", "energy_loss_kwh", "fallback_count",
                        "warning_count", "step_hours"]
        yield ("day_summary.csv", summary_cols,
               [[run[c] for c in summary_cols] for run in runs])
        buses = sorted({int(bus) for run in runs for row in run["trace"]
                        for bus in row["setpoints_kvar"]})
        header = ["controller", "k", "timestamp", "loss_kw", "min_voltage",
                  "min_voltage_bus", "curtailed", "fell_back", "diverged"]
        header += [f"setpoint_{bus}_kvar" for bus in buses]
        rows = []
        for run in runs:
            for row in run["trace"]:
                setpoints = {int(b): q for b, q in row["setpoints_kvar"].items()}
                rows.append([run["controller"], run["k"], row["timestamp"],
                             row["loss_kw"], row["min_voltage"],
                             row["min_voltage_bus"],
                             ";".join(str(b) for b in row["curtailed"]),
                             row["fell_back"], row["diverged"]]
                            + [setpoints.get(bus) for bus in buses])
        yield ("day_trace.csv", header, rows)
    elif op == "fault":
        device_rows = []
        for run in runs:
            for row in run["devices"]:
                device_rows.append([run["controller"], run["k"], row["bus"],
                                    row["voltage"], row["zone"],
                                    row["current_ratio"],
                                    row["q_capability_kvar"],
                                    row["q_injected_kvar"], row["tripped"]])
        yield ("fault_devices.csv",
               ["controller", "k", "bus", "voltage", "zone", "current_ratio",
                "q_capability_kvar", "q_injected_kvar", "tripped"], device_rows)
        buses = runs[0]["device_buses"] if runs else []
        header = (["controller", "k", "t", "v_min", "compliant"]
                  + [f"ratio_{bus}" for bus in buses])
        trace_rows = []
        for run in runs:
            for row in run["trace"]:
                trace_rows.append([run["controller"], run["k"], row["t"],
                                   row["v_min"], row["compliant"]]
                                  + list(row["ratios"]))
        yield ("fault_trace.csv", header, trace_rows)


def _emit(op: str, payload: dict, out_dir) -> None:
    text = _dump_json(payload)
    if out_dir is None:
        sys.stdout.write(text)
        return
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    (target / f"{op}.json").write_text(text)
    for name, header, rows in _csv_views(op, _jsonable(payload)):
        _write_csv(target / name, header, rows)
    log.info("wrote reports under %s", target)


# ---------------------------------------------------------------------------
# Argument parsing and dispatch.

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridloss",
        description="Loss studies for radial distribution feeders with "
                    "reactive-power control of the connected generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", metavar="DIR",
                        help="write JSON and CSV reports into this directory "
                             "instead of printing JSON to stdout")
    output.add_argument("--server", metavar="URL",
                        help="send the request to a running service instead "
                             "of solving in-process")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tolerance", type=float, default=1e-8,
                        help="power-flow convergence tolerance in pu "
                             "(default 1e-8)")
    solver.add_argument("--max-iter", type=int, default=100, dest="max_iter",
                        help="power-flow iteration cap (default 100)")

    controlled = argparse.ArgumentParser(add_help=False)
    controlled.add_argument("--controller", choices=CONTROLLER_CHOICES,
                            default="noaction",
                            help="reactive-power control strategy")
    controlled.add_argument("--k", default="0", metavar="LIST",
                            help="comma-separated reserve coefficients in "
                                 "[0, 1]; each value is run separately")

    pf = sub.add_parser("powerflow", parents=[controlled, solver, output],
                        help="solve one snapshot and report voltages, flows, "
                             "and losses")
    pf.add_argument("--case", required=True, help="feeder case file")

    day = sub.add_parser("day", parents=[controlled, solver, output],
                         help="run a daily generation/load profile and "
                              "aggregate losses")
    day.add_argument("--case", required=True, help="feeder case file")
    day.add_argument("--profile", required=True,
                     help="CSV time series of generation and load scaling")
    day.add_argument("--forecast", choices=FORECAST_CHOICES, default="none",
                     help="setpoint adjustment for the coming interval: "
                          "none, file (fc_* columns), or persistence")
    day.add_argument("--night", choices=NIGHT_CHOICES, default="connected",
                     dest="night", help="solar-plant handling overnight")

    fault = sub.add_parser("fault", parents=[controlled, solver, output],
                           help="apply a voltage-sag scenario and report the "
                                "ride-through response")
    fault.add_argument("--case", required=True, help="feeder case file")
    fault.add_argument("--scenario", required=True,
                       help="sag scenario file (bus, depth, timing)")
    fault.add_argument("--profile", default=None,
                       help="optional profile CSV; its first row sets the "
                            "pre-fault operating point")
    fault.add_argument("--forecast", choices=FORECAST_CHOICES, default="none",
                       help="setpoint adjustment mode for the studied plan")

    val = sub.add_parser("validate", parents=[output],
                         help="check a case file and report feeder shape")
    val.add_argument("--case", required=True, help="feeder case file")

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)

    return parser


def _solver_options(args) -> dict:
    return {"tolerance": args.tolerance, "max_iterations": args.max_iter}


def _dispatch(args) -> int:
    if args.command == "serve":
        import uvicorn
        uvicorn.run("gridloss.service.app:app", host=args.host,
                    port=args.port)
        return EXIT_OK

    if args.command == "powerflow":
        payload = {"case_text": _read(args.case),
                   "controller": args.controller,
                   "k": _parse_k(args.k),
                   "solver": _solver_options(args)}
    elif args.command == "day":
        payload = {"case_text": _read(args.case),
                   "profile_csv": _read(args.profile),
                   "controller": args.controller,
                   "k": _parse_k(args.k),
                   "forecast": args.forecast,
                   "night_policy": args.night,
                   "solver": _solver_options(args)}
    elif args.command == "fault":
        payload = {"case_text": _read(args.case),
                   "scenario_text": _read(args.scenario),
                   "controller": args.controller,
                   "k": _parse_k(args.k),
                   "forecast": args.forecast,
                   "profile_csv": (_read(args.profile)
                                   if args.profile else None),
                   "solver": _solver_options(args)}
    elif args.command == "validate":
        payload = {"case_text": _read(args.case)}
    else:  # pragma: no cover - argparse enforces the choices
        raise CliError(f"unknown command {args.command!r}", EXIT_USAGE)

    result = _call(args.server, args.command, payload)
    _emit(args.command, result, args.out)
    if args.command == "validate" and not result.get("valid", False):
        return EXIT_USAGE
    return EXIT_OK


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
