"""Radial distribution network model, case-file parser and topology tools.

Everything downstream of the parser works in per-unit on the case's MVA
base; kW/kvar (and ohms) appear only in case files. Networks are frozen
after construction and safe to share between concurrent solves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources

from . import capability
from .capability import DfigEnvelope, PvEnvelope

DEFAULT_V_MIN = 0.9
DEFAULT_V_MAX = 1.1


class CaseFormatError(ValueError):
    """Malformed case text; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class CaseSemanticError(ValueError):
    """Structurally valid text describing an inconsistent network."""


class TopologyError(ValueError):
    """Branch graph is not a tree rooted at the slack bus."""


class DeviceKind(Enum):
    PV = "PV"
    DFIG = "DFIG"


@dataclass(frozen=True)
class Bus:
    id: int
    load_p: float = 0.0  # pu
    load_q: float = 0.0  # pu
    v_min: float = DEFAULT_V_MIN
    v_max: float = DEFAULT_V_MAX

    def __post_init__(self):
        if self.v_min >= self.v_max:
            raise CaseSemanticError(
                f"bus {self.id}: v_min {self.v_min} must be below v_max {self.v_max}")


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float  # pu
    x: float  # pu

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise CaseSemanticError(f"branch {self.from_bus}-{self.to_bus} is a self-loop")
        if self.r < 0.0 or self.x < 0.0:
            raise CaseSemanticError(
                f"branch {self.from_bus}-{self.to_bus}: negative impedance")
        if self.r == 0.0 and self.x == 0.0:
            raise CaseSemanticError(
                f"branch {self.from_bus}-{self.to_bus}: r and x cannot both be zero")


@dataclass(frozen=True)
class Device:
    """Inverter-coupled generator attached to one bus.

    ``p_out`` is the snapshot active output used when no time series drives
    the device. The capability envelope is in system per-unit.
    """

    bus: int
    kind: DeviceKind
    s_rated: float  # pu
    p_rated: float  # pu
    p_out: float = 0.0  # pu
    envelope: object = None

    def __post_init__(self):
        if self.s_rated <= 0.0:
            raise CaseSemanticError(f"device at bus {self.bus}: s_rated must be positive")
        if self.kind is DeviceKind.PV and abs(self.s_rated - self.p_rated) > 1e-12:
            raise CaseSemanticError(
                f"PV device at bus {self.bus}: rated apparent and active power "
                f"must be equal ({self.s_rated} != {self.p_rated})")
        if self.envelope is None:
            if self.kind is DeviceKind.PV:
                object.__setattr__(self, "envelope", PvEnvelope(s_rated=self.s_rated))
            else:
                raise CaseSemanticError(
                    f"DFIG device at bus {self.bus} needs an explicit P/Q envelope")

    def q_capability(self, p_g: float, k) -> float:
        """Reactive limit at output ``p_g`` with reserve coefficient ``k``."""
        return capability.q_limit(p_g, self.envelope, k)


@dataclass(frozen=True)
class Network:
    base_mva: float
    base_kv: float
    buses: tuple
    branches: tuple
    slack_bus: int
    devices: tuple = ()
    name: str = ""
    _index: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {b.id: i for i, b in enumerate(self.buses)})

    def __hash__(self):
        return hash((self.name, self.base_mva, self.slack_bus,
                     len(self.buses), len(self.branches), self.devices))

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    def bus_index(self, bus_id: int) -> int:
        try:
            return self._index[bus_id]
        except KeyError:
            raise CaseSemanticError(f"unknown bus id {bus_id}") from None

    def bus(self, bus_id: int) -> Bus:
        return self.buses[self.bus_index(bus_id)]

    def device_at(self, bus_id: int):
        for d in self.devices:
            if d.bus == bus_id:
                return d
        return None

    def validate(self) -> "Network":
        """Check the structural invariants; returns self for chaining."""
        if self.base_mva <= 0.0:
            raise CaseSemanticError(f"base_mva must be positive, got {self.base_mva}")
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise CaseSemanticError(f"duplicate bus ids: {dupes}")
        if self.slack_bus not in self._index:
            raise CaseSemanticError(f"slack bus {self.slack_bus} is not in the bus list")
        for br in self.branches:
            for end in (br.from_bus, br.to_bus):
                if end not in self._index:
                    raise CaseSemanticError(
                        f"branch {br.from_bus}-{br.to_bus} references unknown bus {end}")
        seen_device_bus = set()
        for dev in self.devices:
            if dev.bus not in self._index:
                raise CaseSemanticError(f"device references unknown bus {dev.bus}")
            if dev.bus == self.slack_bus:
                raise CaseSemanticError(f"device at slack bus {dev.bus} is not supported")
            if dev.bus in seen_device_bus:
                raise CaseSemanticError(f"more than one device at bus {dev.bus}")
            seen_device_bus.add(dev.bus)
        orient_radial(self)  # connectivity + acyclicity
        return self

    def with_devices(self, devices) -> "Network":
        return replace(self, devices=tuple(devices))


@dataclass(frozen=True)
class RadialTree:
    """Parent/children relation of a validated network, rooted at the slack.

    ``order`` lists bus ids from the root outward (a topological order),
    ``parent_branch`` maps each non-slack bus to the index of the branch
    that connects it to its parent.
    """

    slack: int
    parent: dict
    children: dict
    parent_branch: dict
    order: tuple
    leaves: frozenset
    branch_nodes: frozenset

    def is_leaf(self, bus_id: int) -> bool:
        return bus_id in self.leaves

    def is_branch_node(self, bus_id: int) -> bool:
        return bus_id in self.branch_nodes

    def subtree(self, bus_id: int):
        """Bus ids of the subtree rooted at ``bus_id`` (inclusive)."""
        out = [bus_id]
        stack = list(self.children.get(bus_id, ()))
        while stack:
            b = stack.pop()
            out.append(b)
            stack.extend(self.children.get(b, ()))
        return out


def orient_radial(net: Network) -> RadialTree:
    """Orient the branch graph from the slack bus outward.

    Raises TopologyError on a cycle (including parallel branches) or on any
    bus unreachable from the slack.
    """
    adjacency = {b.id: [] for b in net.buses}
    for idx, br in enumerate(net.branches):
        if br.from_bus not in adjacency or br.to_bus not in adjacency:
            raise CaseSemanticError(
                f"branch {br.from_bus}-{br.to_bus} references an unknown bus")
        adjacency[br.from_bus].append((br.to_bus, idx))
        adjacency[br.to_bus].append((br.from_bus, idx))

    if net.slack_bus not in adjacency:
        raise CaseSemanticError(f"slack bus {net.slack_bus} is not in the bus list")

    parent, parent_branch, children = {}, {}, {b.id: [] for b in net.buses}
    order = [net.slack_bus]
    visited = {net.slack_bus}
    queue = deque([net.slack_bus])
    while queue:
        bus = queue.popleft()
        for other, idx in adjacency[bus]:
            if idx == parent_branch.get(bus):
                continue
            if other in visited:
                raise TopologyError(
                    f"cycle detected through branch {net.branches[idx].from_bus}-"
                    f"{net.branches[idx].to_bus}; network must be radial")
            visited.add(other)
            parent[other] = bus
            parent_branch[other] = idx
            children[bus].append(other)
            order.append(other)
            queue.append(other)

    unreachable = sorted(set(adjacency) - visited)
    if unreachable:
        raise TopologyError(f"buses not connected to the slack: {unreachable}")

    leaves = frozenset(b for b in visited
                       if b != net.slack_bus and not children[b])
    branch_nodes = frozenset(b for b in visited
                             if b != net.slack_bus and children[b])
    return RadialTree(
        slack=net.slack_bus,
        parent=parent,
        children={b: tuple(c) for b, c in children.items()},
        parent_branch=parent_branch,
        order=tuple(order),
        leaves=leaves,
        branch_nodes=branch_nodes,
    )


def default_dfig_envelope() -> DfigEnvelope:
    """Bundled DFIG P/Q curve in machine per-unit (of rated active power)."""
    text = resources.files("gridloss.data").joinpath("dfig_curve.dat").read_text()
    return capability.load_dfig_curve(text)


# --- case file format ----------------------------------------------------
#
# Keyword lines (CASE, BASE_MVA, BASE_KV, SLACK, *_UNITS) precede three
# column sections, each closed by END:
#
#   BUS     id  p_load  q_load  [v_min  v_max]
#   BRANCH  from  to  r  x
#   DEVICE  bus  kind  s_rated  p_rated  p_out
#
# Units default to kW/kvar, pu impedance and kVA/kW ratings; the *_UNITS
# keywords (BUS_UNITS kw|pu, BRANCH_UNITS pu|ohm, DEVICE_UNITS kw|pu)
# switch a section to per-unit or ohms. '%' starts a comment.

_SECTIONS = ("BUS", "BRANCH", "DEVICE")


def parse_case(text: str, dfig_curve: DfigEnvelope = None) -> Network:
    """Parse case text into a validated Network.

    ``dfig_curve`` overrides the bundled machine-pu DFIG envelope; it is
    scaled by each DFIG's rated active power.
    """
    header = {"CASE": "", "BUS_UNITS": "kw", "BRANCH_UNITS": "pu", "DEVICE_UNITS": "kw"}
    required = {"BASE_MVA": None, "BASE_KV": None, "SLACK": None}
    rows = {name: [] for name in _SECTIONS}
    section = None
    section_end_seen = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        token = line.split()[0].upper()
        if section is None:
            if token in _SECTIONS:
                if token in section_end_seen or rows[token]:
                    raise CaseFormatError(lineno, f"duplicate {token} section")
                section = token
            elif token in header:
                val = line.split(None, 1)[1] if len(line.split(None, 1)) > 1 else ""
                header[token] = val.strip().lower() if token.endswith("_UNITS") else val.strip()
            elif token in required:
                parts = line.split()
                if len(parts) != 2:
                    raise CaseFormatError(lineno, f"{token} expects one value")
                try:
                    required[token] = int(parts[1]) if token == "SLACK" else float(parts[1])
                except ValueError:
                    raise CaseFormatError(lineno, f"bad {token} value {parts[1]!r}") from None
            else:
                raise CaseFormatError(lineno, f"unexpected keyword {token!r}")
        else:
            if token == "END":
                section_end_seen.add(section)
                section = None
            elif token in _SECTIONS or token in header or token in required:
                raise CaseFormatError(lineno, f"section {section} not closed by END")
            else:
                rows[section].append((lineno, line.split()))

    if section is not None:
        raise CaseFormatError(len(text.splitlines()), f"section {section} not closed by END")
    for key, val in required.items():
        if val is None:
            raise CaseFormatError(1, f"missing {key} header")
    for key, allowed in (("BUS_UNITS", ("kw", "pu")),
                         ("BRANCH_UNITS", ("pu", "ohm")),
                         ("DEVICE_UNITS", ("kw", "pu"))):
        if header[key] not in allowed:
            raise CaseFormatError(1, f"{key} must be one of {allowed}, got {header[key]!r}")

    base_mva, base_kv, slack = required["BASE_MVA"], required["BASE_KV"], required["SLACK"]
    if base_mva <= 0:
        raise CaseSemanticError(f"base_mva must be positive, got {base_mva}")
    base_kw = base_mva * 1000.0
    z_base = base_kv ** 2 / base_mva if base_kv else 1.0

    def fnum(lineno, s):
        try:
            return float(s)
        except ValueError:
            raise CaseFormatError(lineno, f"expected a number, got {s!r}") from None

    buses = []
    load_scale = 1.0 if header["BUS_UNITS"] == "pu" else 1.0 / base_kw
    for lineno, cols in rows["BUS"]:
        if len(cols) not in (3, 5):
            raise CaseFormatError(lineno, f"BUS row needs 3 or 5 columns, got {len(cols)}")
        try:
            bus_id = int(cols[0])
        except ValueError:
            raise CaseFormatError(lineno, f"bad bus id {cols[0]!r}") from None
        limits = {}
        if len(cols) == 5:
            limits = {"v_min": fnum(lineno, cols[3]), "v_max": fnum(lineno, cols[4])}
        buses.append(Bus(id=bus_id,
                         load_p=fnum(lineno, cols[1]) * load_scale,
                         load_q=fnum(lineno, cols[2]) * load_scale,
                         **limits))

    branches = []
    imp_scale = 1.0 / z_base if header["BRANCH_UNITS"] == "ohm" else 1.0
    for lineno, cols in rows["BRANCH"]:
        if len(cols) != 4:
            raise CaseFormatError(lineno, f"BRANCH row needs 4 columns, got {len(cols)}")
        try:
            f, t = int(cols[0]), int(cols[1])
        except ValueError:
            raise CaseFormatError(lineno, "bad branch endpoint") from None
        branches.append(Branch(from_bus=f, to_bus=t,
                               r=fnum(lineno, cols[2]) * imp_scale,
                               x=fnum(lineno, cols[3]) * imp_scale))

    devices = []
    rating_scale = 1.0 if header["DEVICE_UNITS"] == "pu" else 1.0 / base_kw
    machine_curve = dfig_curve
    for lineno, cols in rows["DEVICE"]:
        if len(cols) != 5:
            raise CaseFormatError(lineno, f"DEVICE row needs 5 columns, got {len(cols)}")
        try:
            bus_id = int(cols[0])
        except ValueError:
            raise CaseFormatError(lineno, f"bad device bus {cols[0]!r}") from None
        kind_txt = cols[1].upper()
        try:
            kind = DeviceKind(kind_txt)
        except ValueError:
            raise CaseFormatError(
                lineno, f"device kind must be PV or DFIG, got {cols[1]!r}") from None
        s_rated = fnum(lineno, cols[2]) * rating_scale
        p_rated = fnum(lineno, cols[3]) * rating_scale
        p_out = fnum(lineno, cols[4]) * rating_scale
        envelope = None
        if kind is DeviceKind.DFIG:
            if machine_curve is None:
                machine_curve = default_dfig_envelope()
            envelope = machine_curve.scaled(p_rated)
        try:
            devices.append(Device(bus=bus_id, kind=kind, s_rated=s_rated,
                                  p_rated=p_rated, p_out=p_out, envelope=envelope))
        except CaseSemanticError as exc:
            raise CaseFormatError(lineno, str(exc)) from None

    net = Network(base_mva=base_mva, base_kv=base_kv, buses=tuple(buses),
                  branches=tuple(branches), slack_bus=slack,
                  devices=tuple(devices), name=header["CASE"])
    net.validate()
    return net


def serialize_case(net: Network) -> str:
    """Render a Network back to case text.

    Emits per-unit sections so that parse_case(serialize_case(net)) returns
    an identical Network (float-exact round trip).
    """
    out = []
    if net.name:
        out.append(f"CASE {net.name}")
    out.append(f"BASE_MVA {net.base_mva!r}")
    out.append(f"BASE_KV {net.base_kv!r}")
    out.append(f"SLACK {net.slack_bus}")
    out.append("BUS_UNITS pu")
    out.append("BRANCH_UNITS pu")
    out.append("DEVICE_UNITS pu")
    out.append("BUS")
    for b in net.buses:
        out.append(f"{b.id} {b.load_p!r} {b.load_q!r} {b.v_min!r} {b.v_max!r}")
    out.append("END")
    out.append("BRANCH")
    for br in net.branches:
        out.append(f"{br.from_bus} {br.to_bus} {br.r!r} {br.x!r}")
    out.append("END")
    if net.devices:
        out.append("DEVICE")
        for d in net.devices:
            out.append(f"{d.bus} {d.kind.value} {d.s_rated!r} {d.p_rated!r} {d.p_out!r}")
        out.append("END")
    return "\n".join(out) + "\n"
