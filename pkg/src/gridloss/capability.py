"""Reactive power capability envelopes for inverter-coupled generation.

Two device families are covered: PV inverters, whose limits follow from a
power-factor band and the apparent-power circle, and DFIG wind turbines,
whose over-excited limit is a tabulated P/Q curve. Both limits can be
derated by a reserve coefficient that withholds a fraction of the reactive
capability for voltage support after faults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

#: Power-factor bound of 0.8 (over-excited) expressed as a max angle.
PHI_MAX_DEFAULT = math.acos(0.8)


class CapabilityDomainError(ValueError):
    """Active power outside the envelope's valid range."""


def _k_value(k) -> float:
    """Accept a bare float or a ReserveCoefficient; validate the range."""
    kf = float(k)
    if not 0.0 <= kf <= 1.0:
        raise ValueError(f"reserve coefficient must be in [0, 1], got {kf}")
    return kf


@dataclass(frozen=True)
class ReserveCoefficient:
    """Fraction of reactive capability withheld during normal operation.

    k = 0 keeps nothing in reserve, k = 1 reserves everything for
    post-contingency voltage support.
    """

    k: float

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"reserve coefficient must be in [0, 1], got {self.k}")

    def __float__(self) -> float:
        return self.k


@dataclass(frozen=True)
class PvEnvelope:
    """PV inverter envelope: power-factor cone intersected with the S circle."""

    s_rated: float
    phi_max: float = PHI_MAX_DEFAULT

    def __post_init__(self):
        if self.s_rated <= 0.0:
            raise ValueError(f"s_rated must be positive, got {self.s_rated}")
        if not 0.0 < self.phi_max < math.pi / 2:
            raise ValueError(f"phi_max must be in (0, pi/2), got {self.phi_max}")


@dataclass(frozen=True)
class DfigEnvelope:
    """Piecewise-linear over-excited limit of a DFIG wind turbine.

    ``points`` are (active power, max reactive power) samples with strictly
    increasing P; queries between samples interpolate linearly.
    """

    points: tuple = field(default=())

    def __post_init__(self):
        pts = tuple((float(p), float(q)) for p, q in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("DFIG envelope needs at least two samples")
        for (p0, q0), (p1, q1) in zip(pts, pts[1:]):
            if p1 <= p0:
                raise ValueError(f"P samples must be strictly increasing ({p0} -> {p1})")
        for p, q in pts:
            if q < 0.0:
                raise ValueError(f"Q_max must be nonnegative, got {q} at P={p}")

    @property
    def p_min(self) -> float:
        return self.points[0][0]

    @property
    def p_max(self) -> float:
        return self.points[-1][0]

    def scaled(self, factor: float) -> "DfigEnvelope":
        """Rescale both axes, e.g. from machine base to system per-unit."""
        return DfigEnvelope(tuple((p * factor, q * factor) for p, q in self.points))


def pv_q_limit(p_g: float, env: PvEnvelope, k) -> float:
    """Reactive limit of a PV inverter at active output ``p_g``.

    The binding constraint is whichever of the power-factor cone or the
    apparent-power circle is tighter, scaled by (1 - k).
    """
    kf = _k_value(k)
    if p_g < 0.0 or p_g > env.s_rated + 1e-12:
        raise CapabilityDomainError(
            f"active output {p_g} outside [0, {env.s_rated}]")
    p_g = min(p_g, env.s_rated)
    q_pf = p_g * math.tan(env.phi_max)
    q_s = math.sqrt(max(env.s_rated ** 2 - p_g ** 2, 0.0))
    return (1.0 - kf) * min(q_pf, q_s)


def dfig_q_limit(p_g: float, env: DfigEnvelope, k) -> float:
    """Reactive limit of a DFIG turbine, interpolated on its P/Q curve."""
    kf = _k_value(k)
    pts = env.points
    if p_g < pts[0][0] - 1e-12 or p_g > pts[-1][0] + 1e-12:
        raise CapabilityDomainError(
            f"active output {p_g} outside sampled range "
            f"[{pts[0][0]}, {pts[-1][0]}]")
    p_g = min(max(p_g, pts[0][0]), pts[-1][0])
    for (p0, q0), (p1, q1) in zip(pts, pts[1:]):
        if p_g <= p1:
            w = (p_g - p0) / (p1 - p0)
            return (1.0 - kf) * (q0 + w * (q1 - q0))
    return (1.0 - kf) * pts[-1][1]  # unreachable, keeps type checkers calm


def q_limit(p_g: float, env, k) -> float:
    """Dispatch on envelope type."""
    if isinstance(env, PvEnvelope):
        return pv_q_limit(p_g, env, k)
    if isinstance(env, DfigEnvelope):
        return dfig_q_limit(p_g, env, k)
    raise TypeError(f"unknown envelope type {type(env).__name__}")


def load_dfig_curve(text: str) -> DfigEnvelope:
    """Parse a two-column P/Qmax curve file. ``%`` starts a comment."""
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        cols = line.split()
        if len(cols) != 2:
            raise ValueError(f"line {lineno}: expected two columns, got {len(cols)}")
        try:
            points.append((float(cols[0]), float(cols[1])))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return DfigEnvelope(tuple(points))
