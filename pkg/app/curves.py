"""Curves in F0 carrying the reduced critical points of E6.

C2 = {tau_<(C) : C > 0}     left half, from the cusp 0 to 1/4 + i infinity
C3 = {tau_>(C) : C < 1}     right half, from the cusp 1 to 3/4 + i infinity
C1 = {tau_<(C) : C < 0} u {tau_inf} u {tau_>(C) : C > 1}  = 1/(1 - C2), from 0 to 1

C1 is produced as the image of C2 under tau -> 1/(1 - tau), with parameter
C -> 1/(1 - C); the point C2(1) = tau_1 lands on tau_inf (C = infinity).
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.critical import CriticalLocator, critical_locator, half_of, fc_values
from app.errors import BranchJumpError, ContinuationStallError, InvalidUseError, NoConvergenceError
from app.modular import GAMMA_1, IDENTITY, evaluate, in_F
from app.models import (
    CurveId,
    CurvePoint,
    DenseSampleSpec,
    Group,
    Half,
    Precision,
    UnimodularMatrix,
)

logger = logging.getLogger(__name__)

MIN_TARGET = 1e-10
GROW_AFTER = 5


def _c1_to_c2(C: float) -> float:
    """Parameter on C2 whose image under 1/(1 - tau) carries C1 parameter C"""
    if math.isinf(C):
        return 1.0
    return 1 - 1 / C


def _c2_to_c1(c: float) -> float:
    if c == 1.0:
        return math.inf
    return 1 / (1 - c)


def _point_segment_distances(points: np.ndarray, polyline: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest segment of the polyline"""
    points = np.asarray(points, dtype=complex)
    polyline = np.asarray(polyline, dtype=complex)
    if len(polyline) == 1:
        return np.abs(points - polyline[0])
    a = polyline[:-1][None, :]
    ab = (polyline[1:] - polyline[:-1])[None, :]
    p = points[:, None]
    length2 = np.abs(ab) ** 2
    safe = np.where(length2 > 0, length2, 1.0)
    t = np.clip(((p - a) * np.conj(ab)).real / safe, 0.0, 1.0)
    return np.abs(p - (a + t * ab)).min(axis=1)


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (np.conj(u) * v).imag


def _polylines_cross(p: np.ndarray, q: np.ndarray) -> bool:
    if len(p) < 2 or len(q) < 2:
        return False
    a, b = p[:-1, None], p[1:, None]
    c, d = q[None, :-1], q[None, 1:]
    d1 = _cross(b - a, c - a)
    d2 = _cross(b - a, d - a)
    d3 = _cross(d - c, a - c)
    d4 = _cross(d - c, b - c)
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


class CurveTracer:
    def __init__(self, locator: Optional[CriticalLocator] = None):
        self.locator = locator or critical_locator

    def _point(self, curve: CurveId, C: float, tau: complex, prec: Precision, c=None, d=None) -> CurvePoint:
        if math.isinf(C):
            residual = self.locator.critical_residual(tau, prec)
        else:
            residual = self.locator.fc_residual(C, tau, prec)
        return CurvePoint(C=C, tau=tau, curve=curve, half=half_of(tau), residual=residual, c=c, d=d)

    def _follow(
        self,
        lower: bool,
        c_start: float,
        c_end: float,
        stops: Iterable[float],
        max_step: float,
        image: UnimodularMatrix,
        prec: Precision,
    ) -> List[Tuple[float, complex]]:
        """Continue tau_<(C) (lower) or tau_>(C) from c_start to c_end; steps are sized on image(tau)"""
        expected = Half.LEFT if lower else Half.RIGHT
        start_records = self.locator.solve_fC(c_start, prec)
        tau = (start_records[0] if lower else start_records[1]).tau
        direction = 1.0 if c_end >= c_start else -1.0
        stops = sorted({s for s in stops if direction * (s - c_start) > 0 and direction * (c_end - s) > 0} | {c_end})
        if direction < 0:
            stops.reverse()

        points = [(c_start, tau)]
        c = c_start
        target = min(settings.TRACE_MAX_STEP, max_step)
        successes = 0
        wrong_half = False
        while c != c_end:
            z = image.apply(tau)
            if (
                tau.imag > settings.TRACE_IM_CUTOFF
                or z.imag > settings.TRACE_IM_CUTOFF
                or min(abs(z), abs(z - 1)) < settings.TRACE_CUSP_CUTOFF
            ):
                logger.info(f"Trace stopped near a cusp at C={c}, tau={z}")
                break

            ev = evaluate(tau, prec)
            fv = fc_values(c, ev)
            slope = -ev.critical_form / fv.derivative
            speed = abs(slope) / abs(image.automorphy(tau)) ** 2
            next_stop = next(s for s in stops if direction * (s - c) > 0)
            nxt = c + direction * target / max(speed, 1e-300)
            if direction * (nxt - next_stop) >= 0:
                nxt = next_stop

            predicted = tau + (nxt - c) * slope
            accepted = False
            if predicted.imag > 0:
                try:
                    new, _ = self.locator.newton(self.locator.fc_family(nxt, prec), predicted)
                    close = abs(new - predicted) <= 0.5 * abs(predicted - tau) + 1e-10
                    short = abs(image.apply(new) - z) <= 2 * target
                    wrong_half = half_of(new) != expected
                    accepted = close and short and not wrong_half
                except NoConvergenceError:
                    accepted = False

            if not accepted:
                target *= 0.5
                successes = 0
                if target < MIN_TARGET:
                    if wrong_half:
                        raise BranchJumpError(f"continuation left the {expected.value} half at C={nxt}")
                    raise ContinuationStallError(f"curve step underflow at C={c}, tau={tau}")
                continue

            c, tau = nxt, new
            points.append((c, tau))
            successes += 1
            if successes >= GROW_AFTER:
                target = min(2 * target, max_step)
                successes = 0
        return points

    def trace_curve(
        self,
        curve: CurveId,
        C_lo: float,
        C_hi: float,
        max_step: Optional[float] = None,
        include: Sequence[float] = (),
        prec: Optional[Precision] = None,
    ) -> List[CurvePoint]:
        """Ordered samples of a curve for parameters from C_lo to C_hi.

        For C1 the parameter runs from C_lo up through +infinity (wrapping to
        -infinity) to C_hi whenever C_lo > C_hi or an endpoint is infinite.
        """
        prec = self.locator.resolve_precision(prec)
        max_step = max_step or settings.TRACE_MAX_STEP

        if curve == CurveId.C1:
            for value in (C_lo, C_hi, *include):
                if 0 <= value <= 1:
                    raise InvalidUseError(f"C1 parameter {value} lies in [0, 1]")
            c_lo, c_hi = _c1_to_c2(C_lo), _c1_to_c2(C_hi)
            if c_lo > c_hi:
                raise InvalidUseError(f"C1 range {C_lo}..{C_hi} crosses [0, 1]")
            # tau_inf (C = infinity) is always a sample when in range
            stops = [_c1_to_c2(value) for value in include] + [1.0]
            raw = self._follow(True, c_lo, c_hi, stops, max_step, GAMMA_1, prec)
            points = [self._point(curve, _c2_to_c1(c), GAMMA_1.apply(tau), prec) for c, tau in raw]
        else:
            lower = curve == CurveId.C2
            for value in (C_lo, C_hi):
                if not math.isfinite(value) or (lower and value <= 0) or (not lower and value >= 1):
                    raise InvalidUseError(f"{curve.value} parameter {value} outside its range")
            raw = self._follow(lower, C_lo, C_hi, include, max_step, IDENTITY, prec)
            points = [self._point(curve, c, tau, prec) for c, tau in raw]

        logger.info(f"Traced {curve.value} over [{C_lo}, {C_hi}]: {len(points)} points")
        return points

    def restrict_to_F(self, points: List[CurvePoint]) -> List[CurvePoint]:
        kept = [point for point in points if in_F(point.tau)]
        dropped = [point for point in points if not in_F(point.tau)]
        for point in kept:
            if point.curve == CurveId.C1:
                logger.warning(f"C1 point {point.tau} at C={point.C} reported inside F")
            elif point.curve == CurveId.C2 and point.C < 1 - 1e-9:
                logger.warning(f"C2 point at C={point.C} < 1 lies in F")
            elif point.curve == CurveId.C3 and point.C > 1e-9:
                logger.warning(f"C3 point at C={point.C} > 0 lies in F")
        for point in dropped:
            if (point.curve == CurveId.C2 and point.C > 1 + 1e-9) or (point.curve == CurveId.C3 and point.C < -1e-9):
                logger.warning(f"{point.curve.value} point at C={point.C} falls outside F")
        return kept

    def _dense_points(self, c: int, d: int, group: Group, prec: Precision) -> List[CurvePoint]:
        if c == 0:
            tau_inf = self.locator.find_tau_infinity().tau
            return [self._point(CurveId.C1, math.inf, tau_inf, prec, c=0, d=1)]
        C = float(Fraction(-d, c))
        lower, upper = self.locator.solve_fC(C, prec)
        if group == Group.SL2Z:
            if C >= 1:
                return [self._point(CurveId.C2, C, lower.tau, prec, c, d)]
            return [self._point(CurveId.C3, C, upper.tau, prec, c, d)]
        return [
            self._point(CurveId.C2 if C > 0 else CurveId.C1, C, lower.tau, prec, c, d),
            self._point(CurveId.C3 if C < 1 else CurveId.C1, C, upper.tau, prec, c, d),
        ]

    def dense_sample(self, spec: DenseSampleSpec, prec: Optional[Precision] = None) -> List[CurvePoint]:
        """Reduced critical points -d/c for coprime (c, d), |c| <= max_denominator, |d/c| <= max_abs_C"""
        prec = self.locator.resolve_precision(prec)
        pairs = []
        if spec.group == Group.GAMMA0_2:
            pairs.append((0, 1))
        step = 2 if spec.group == Group.GAMMA0_2 else 1
        for c in range(step, spec.max_denominator + 1, step):
            bound = int(math.floor(spec.max_abs_C * c))
            for d in range(-bound, bound + 1):
                if gcd(c, d) != 1:
                    continue
                C = Fraction(-d, c)
                if spec.group == Group.SL2Z and 0 < C < 1:
                    continue
                pairs.append((c, d))

        with ThreadPoolExecutor(max_workers=settings.WORKERS) as pool:
            batches = list(pool.map(lambda pair: self._dense_points(pair[0], pair[1], spec.group, prec), pairs))
        points = [point for batch in batches for point in batch]
        points.sort(key=lambda p: (math.inf if math.isinf(p.C) else p.C, p.tau.real))
        logger.info(f"Dense sample ({spec.group.value}, c <= {spec.max_denominator}): {len(points)} points")
        return points

    def symmetric_pairs(self, values: Iterable[float], prec: Optional[Precision] = None) -> List[CurvePoint]:
        """C3 points at C and C2 points at 1 - C, for C < 1"""
        prec = self.locator.resolve_precision(prec)
        points = []
        for C in values:
            _, upper = self.locator.solve_fC(C, prec)
            lower, _ = self.locator.solve_fC(1 - C, prec)
            points.append(self._point(CurveId.C3, C, upper.tau, prec))
            points.append(self._point(CurveId.C2, 1 - C, lower.tau, prec))
        return points

    def symmetry_check(self, points: List[CurvePoint], prec: Optional[Precision] = None) -> float:
        """max |tau_<(1 - C) - (1 - conj tau_>(C))| over matched pairs"""
        lower = {round(p.C, 12): p.tau for p in points if p.curve == CurveId.C2}
        deviations = []
        for point in points:
            if point.curve != CurveId.C3:
                continue
            partner = lower.get(round(1 - point.C, 12))
            if partner is not None:
                deviations.append(abs(partner - (1 - point.tau.conjugate())))
        if not deviations:
            raise InvalidUseError("no (C, 1 - C) pairs among the points")
        return max(deviations)

    def reflection_deviation(self, points: List[CurvePoint]) -> float:
        """Distance of reflected C1 samples (tau -> 1 - conj tau) from the C1 polyline"""
        c1 = np.array([p.tau for p in points if p.curve == CurveId.C1], dtype=complex)
        if len(c1) < 2:
            raise InvalidUseError("need at least two C1 points")
        reflected = 1 - np.conj(c1)
        # Only points whose mirror falls within the sampled stretch
        window = (reflected.imag >= c1.imag.min()) & (reflected.imag <= c1.imag.max())
        if not window.any():
            return 0.0
        return float(_point_segment_distances(reflected[window], c1).max())

    def c1_cross_check(self, points: List[CurvePoint], prec: Optional[Precision] = None) -> float:
        """max distance between C1 samples and direct solves of f_C"""
        prec = self.locator.resolve_precision(prec)
        deviation = 0.0
        for point in points:
            if point.curve != CurveId.C1:
                continue
            if math.isinf(point.C):
                direct = self.locator.find_tau_infinity().tau
            else:
                lower, upper = self.locator.solve_fC(point.C, prec)
                direct = lower.tau if point.C < 0 else upper.tau
            deviation = max(deviation, abs(direct - point.tau))
        return deviation

    def c1_mapping_deviation(self, points: List[CurvePoint], prec: Optional[Precision] = None) -> float:
        """C2 samples pushed by 1/(1 - tau): residual of f_{1/(1-C)} at the image, relative"""
        prec = self.locator.resolve_precision(prec)
        worst = 0.0
        for point in points:
            if point.curve != CurveId.C2:
                continue
            C = _c2_to_c1(point.C)
            tau = GAMMA_1.apply(point.tau)
            if math.isinf(C):
                residual = self.locator.critical_residual(tau, prec)
            else:
                residual = self.locator.fc_residual(C, tau, prec)
            worst = max(worst, residual)
        return worst

    def distance_to_curve(self, points: List[CurvePoint], polyline: List[CurvePoint]) -> np.ndarray:
        return _point_segment_distances(
            np.array([p.tau for p in points], dtype=complex),
            np.array([p.tau for p in polyline], dtype=complex),
        )

    def min_separation(
        self, curves: Dict[CurveId, List[CurvePoint]], im_max: float = 10.0, cusp_margin: float = 0.05
    ) -> float:
        """Smallest distance between different curves, away from the cusps and below Im = im_max"""
        polylines = {}
        for curve, points in curves.items():
            taus = np.array([p.tau for p in points], dtype=complex)
            keep = (taus.imag <= im_max) & (np.abs(taus) > cusp_margin) & (np.abs(taus - 1) > cusp_margin)
            polylines[curve] = taus[keep]
        best = math.inf
        names = list(polylines)
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                p, q = polylines[first], polylines[second]
                if len(p) == 0 or len(q) == 0:
                    continue
                if _polylines_cross(p, q):
                    logger.warning(f"{first.value} and {second.value} cross")
                    return 0.0
                distance = min(_point_segment_distances(p, q).min(), _point_segment_distances(q, p).min())
                best = min(best, float(distance))
        return best


# Global instance
curve_tracer = CurveTracer()
