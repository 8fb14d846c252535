"""Path pieces in the tau-plane and the truncated boundaries of F and F0.

Every piece is parameterized over s in [0, 1] and can be evaluated on
scalars or numpy arrays.  Boundaries run counterclockwise, so the winding
of f along them counts zeros inside.
"""
import math
from dataclasses import dataclass
from typing import List, Union

import numpy as np

from app.models import DomainName

Number = Union[complex, np.ndarray]


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex
    label: str = ""

    def point(self, s: Number) -> Number:
        return self.start + s * (self.end - self.start)

    def tangent(self, s: Number) -> Number:
        return (self.end - self.start) + 0 * s

    @property
    def length(self) -> float:
        return abs(self.end - self.start)


@dataclass(frozen=True)
class Arc:
    """center + radius * exp(i theta), theta running from theta0 to theta1"""

    center: complex
    radius: float
    theta0: float
    theta1: float
    label: str = ""

    def point(self, s: Number) -> Number:
        theta = self.theta0 + s * (self.theta1 - self.theta0)
        return self.center + self.radius * np.exp(1j * theta)

    def tangent(self, s: Number) -> Number:
        theta = self.theta0 + s * (self.theta1 - self.theta0)
        return 1j * self.radius * np.exp(1j * theta) * (self.theta1 - self.theta0)

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)


Piece = Union[Segment, Arc]


def _f0_boundary(height: float, cusp_radius: float) -> List[Piece]:
    r = cusp_radius
    # Horocycle |tau - ir| = r meets |tau - 1/2| = 1/2 at p0
    theta0 = math.atan2(1 - 4 * r * r, 4 * r)
    p0 = complex(4 * r * r, 2 * r) / (1 + 4 * r * r)
    alpha0 = math.atan2(p0.imag, p0.real - 0.5)
    return [
        Segment(complex(0, height), complex(0, 2 * r), "left"),
        Arc(complex(0, r), r, math.pi / 2, theta0, "cap0"),
        Arc(complex(0.5, 0), 0.5, alpha0, math.pi - alpha0, "floor"),
        Arc(complex(1, r), r, math.pi - theta0, math.pi / 2, "cap1"),
        Segment(complex(1, 2 * r), complex(1, height), "right"),
        Segment(complex(1, height), complex(0, height), "top"),
    ]


def _f_boundary(height: float) -> List[Piece]:
    return [
        Segment(complex(0, height), complex(0, 1), "left"),
        Arc(0j, 1.0, math.pi / 2, math.pi / 3, "floor0"),
        Arc(complex(1, 0), 1.0, 2 * math.pi / 3, math.pi / 2, "floor1"),
        Segment(complex(1, 1), complex(1, height), "right"),
        Segment(complex(1, height), complex(0, height), "top"),
    ]


def domain_boundary(domain: DomainName, height: float, cusp_radius: float) -> List[Piece]:
    """Counterclockwise boundary of F0 (cusp caps of radius cusp_radius at 0 and 1) or F, cut at Im = height"""
    if domain == DomainName.F0:
        return _f0_boundary(height, cusp_radius)
    return _f_boundary(height)


def sample_boundary(pieces: List[Piece], per_piece: int = 200) -> np.ndarray:
    """Points along a boundary, for plotting and boundary-mesh checks"""
    s = np.linspace(0.0, 1.0, per_piece)
    return np.concatenate([np.asarray(piece.point(s), dtype=complex) for piece in pieces])
