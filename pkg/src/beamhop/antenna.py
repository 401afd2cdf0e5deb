"""Sector-mainlobe / circular-sidelobe antenna model.

A pattern is parametrized by the beam width theta and the fraction rho
of radiated energy inside the mainlobe. The two gains follow from
energy conservation:

    g_main = 2*pi*rho / theta
    g_side = 2*pi*(1 - rho) / (2*pi - theta)

so that (theta/2pi)*g_main + ((2pi-theta)/2pi)*g_side = 1 holds exactly.
Backlobes are ignored and antenna efficiency is one. theta = 2*pi is the
omnidirectional limit, where both gains equal one (and rho must be 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AntennaPattern:
    theta: float
    rho: float
    g_main: float
    g_side: float


def derive_gains(theta: float, rho: float) -> AntennaPattern:
    """Build a pattern from beam width and mainlobe energy fraction.

    Requires theta in (0, 2pi] and rho in (theta/2pi, 1], which keeps
    g_main >= 1 >= g_side >= 0. The omnidirectional case theta = 2pi
    forces rho = 1.
    """
    if not (0.0 < theta <= TWO_PI):
        raise ValueError(f"beam width must lie in (0, 2*pi], got {theta}")
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"mainlobe energy fraction must lie in (0, 1], got {rho}")
    if theta == TWO_PI:
        if rho != 1.0:
            raise ValueError(
                "omnidirectional beam (theta = 2*pi) requires rho = 1; "
                f"got rho = {rho}")
        return AntennaPattern(theta=theta, rho=1.0, g_main=1.0, g_side=1.0)
    if rho <= theta / TWO_PI:
        raise ValueError(
            f"rho = {rho} <= theta/2pi = {theta / TWO_PI:.6g}: mainlobe gain "
            "would drop below the sidelobe gain")
    g_main = TWO_PI * rho / theta
    g_side = TWO_PI * (1.0 - rho) / (TWO_PI - theta)
    return AntennaPattern(theta=theta, rho=rho, g_main=g_main, g_side=g_side)


@dataclass(frozen=True)
class Boresight:
    """A steering direction; azimuth is normalized to [0, 2pi)."""

    azimuth: float
    node: int = -1

    def __post_init__(self):
        object.__setattr__(self, "azimuth", self.azimuth % TWO_PI)


class GainKind(enum.Enum):
    MAIN_MAIN = "main-main"
    MAIN_SIDE = "main-side"
    SIDE_SIDE = "side-side"


@dataclass(frozen=True)
class GainCategory:
    """One of the three pairwise gain products, with its numeric value."""

    kind: GainKind
    value: float


def gain_value(kind: GainKind, pattern: AntennaPattern) -> float:
    if kind is GainKind.MAIN_MAIN:
        return pattern.g_main * pattern.g_main
    if kind is GainKind.MAIN_SIDE:
        return pattern.g_main * pattern.g_side
    return pattern.g_side * pattern.g_side


def steer(tx_pos, rx_pos, tx_node: int = -1, rx_node: int = -1) -> tuple[Boresight, Boresight]:
    """Point two antennas at each other; returns (tx, rx) boresights."""
    dx = float(rx_pos[0]) - float(tx_pos[0])
    dy = float(rx_pos[1]) - float(tx_pos[1])
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("cannot steer between coincident positions")
    ang = math.atan2(dy, dx)
    return (Boresight(azimuth=ang, node=tx_node),
            Boresight(azimuth=ang + math.pi, node=rx_node))


def _wrap(offset):
    """Wrap an angle difference into [-pi, pi)."""
    return (offset + math.pi) % TWO_PI - math.pi


def in_mainlobe(offset, theta) -> np.ndarray:
    """Membership of a wrapped angular offset in [-theta/2, theta/2).

    The interval is half-open so that a hit exactly on the lower edge
    counts as mainlobe and the tie-break is deterministic.
    """
    half = theta / 2.0
    return (offset >= -half) & (offset < half)


def gain_between(a: tuple[Boresight, tuple], b: tuple[Boresight, tuple],
                 pattern: AntennaPattern) -> GainCategory:
    """Classify the pairwise antenna gain between two steered nodes.

    MAIN_MAIN iff each node's mainlobe sector contains the other's
    position, MAIN_SIDE iff exactly one does, SIDE_SIDE otherwise. The
    angle a->b is computed once and the reverse direction is its pi
    shift, so both sector tests share one atan2 evaluation.
    """
    (bore_a, pos_a), (bore_b, pos_b) = a, b
    dx = float(pos_b[0]) - float(pos_a[0])
    dy = float(pos_b[1]) - float(pos_a[1])
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("gain undefined for coincident positions")
    ang = math.atan2(dy, dx)
    a_sees_b = bool(in_mainlobe(_wrap(ang - bore_a.azimuth), pattern.theta))
    b_sees_a = bool(in_mainlobe(_wrap(ang + math.pi - bore_b.azimuth), pattern.theta))
    if a_sees_b and b_sees_a:
        kind = GainKind.MAIN_MAIN
    elif a_sees_b or b_sees_a:
        kind = GainKind.MAIN_SIDE
    else:
        kind = GainKind.SIDE_SIDE
    return GainCategory(kind=kind, value=gain_value(kind, pattern))


def channel_power_gain(category: GainCategory, distance: float, alpha: float) -> float:
    """Power gain of a link: (gain product) / r^alpha."""
    if distance <= 0.0:
        raise DegenerateGeometry(f"distance must be positive, got {distance}")
    return category.value / distance ** alpha
