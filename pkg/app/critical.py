"""Zeros of E6' and of the families built around it.

F   = g2^2 - 18 eta1 g3                  (a multiple of E6')
h_t = (1 - t) g2^2 + t F                  homotopy from g2^2 (t = 0) to F (t = 1)
f_C = (C - tau) F - 36 pi i g3            f_C(tau) = 0  <=>  phi(tau) = C
phi = tau + 36 pi i g3 / F

For real C outside {0, 1}, f_C has exactly one zero in each half of F0
(Re tau < 1/2 and Re tau > 1/2).
"""
import cmath
import logging
import math
import threading
from collections import OrderedDict
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from app.config import settings
from app.contour import domain_boundary
from app.eisenstein import PI, ROUNDING, default_precision
from app.errors import (
    BoundaryZeroError,
    ContinuationStallError,
    GroupMembershipError,
    InvalidUseError,
    NoConvergenceError,
    NonIntegralWindingError,
    RootCollisionError,
)
from app.modular import GAMMA_1, GAMMA_2, IDENTITY, evaluate
from app.models import (
    MACHINE_EPS,
    CriticalPointsReport,
    DomainName,
    EisensteinEval,
    FamilyKind,
    FamilyParam,
    Group,
    Half,
    Precision,
    UnimodularMatrix,
    ZeroCountReport,
    ZeroRecord,
)

logger = logging.getLogger(__name__)

RHO = complex(0.5, math.sqrt(3) / 2)
B_LOW = 0.5
B_HIGH = math.sqrt(3) / 2
HALF_LINE_SCAN = (0.5, 12.0, 0.01)

ANCHOR_ABS_C = 1e3
CONTINUATION_RATIO = 1.25
NEWTON_CLIP = 0.25
SOLUTION_CACHE_SIZE = 256
COLLISION_TOL = 1e-10
HALF_TOL = 1e-12

WINDING_ARG_STEP = 0.5
WINDING_ROUNDS = 4
WINDING_INITIAL = 32


class FamilyValue(NamedTuple):
    value: complex
    derivative: complex
    err: float
    scale: float


def fc_values(C: float, ev: EisensteinEval) -> FamilyValue:
    offset = C - ev.tau
    F = ev.critical_form
    value = offset * F - 36j * PI * ev.g3
    scale = abs(offset) * (abs(ev.g2) ** 2 + 18 * abs(ev.eta1 * ev.g3)) + 36 * PI * abs(ev.g3)
    return FamilyValue(
        value=value,
        derivative=-7 * F + offset * ev.critical_form_prime,
        err=abs(offset) * ev.critical_err + 36 * PI * ev.err_bound + ROUNDING * scale,
        scale=scale,
    )


def critical_values(ev: EisensteinEval) -> FamilyValue:
    return FamilyValue(
        value=ev.critical_form,
        derivative=ev.critical_form_prime,
        err=ev.critical_err,
        scale=abs(ev.g2) ** 2 + 18 * abs(ev.eta1 * ev.g3),
    )


def h_values(t: float, ev: EisensteinEval) -> FamilyValue:
    g2_prime = (1j / PI) * (2 * ev.eta1 * ev.g2 - 3 * ev.g3)
    scale = abs(ev.g2) ** 2 + 18 * t * abs(ev.eta1 * ev.g3)
    g2_squared = abs(ev.g2) ** 2
    # Rounding of size |g2|^2 only on the (1 - t) share; at t = 1 this is the bound of F
    return FamilyValue(
        value=(1 - t) * ev.g2 ** 2 + t * ev.critical_form,
        derivative=2 * (1 - t) * ev.g2 * g2_prime + t * ev.critical_form_prime,
        err=(1 - t) * (2 * abs(ev.g2) * ev.err_bound + ROUNDING * g2_squared) + t * ev.critical_err,
        scale=scale,
    )


def half_of(tau: complex, tol: float = HALF_TOL) -> Half:
    if abs(tau.real - 0.5) <= tol:
        return Half.ON
    return Half.LEFT if tau.real < 0.5 else Half.RIGHT


def _orbit_representative(C: float) -> Tuple[float, int]:
    """(R, k) with R = psi^k(C), psi(C) = 1/(1 - C), of largest modulus over the orbit"""
    orbit = [C]
    for _ in range(2):
        orbit.append(1 / (1 - orbit[-1]))
    k = max(range(3), key=lambda index: abs(orbit[index]))
    return orbit[k], k


def _power(g: UnimodularMatrix, k: int) -> UnimodularMatrix:
    result = IDENTITY
    for _ in range(k):
        result = g @ result
    return result


class CriticalLocator:
    def __init__(self, prec: Optional[Precision] = None, cache_size: int = SOLUTION_CACHE_SIZE):
        self.prec = prec
        self.cache_size = cache_size
        self._lock = threading.Lock()
        # Orbit representative R -> (root escaping to the cusp, root near tau_infinity)
        self._solutions: "OrderedDict[float, Tuple[complex, complex]]" = OrderedDict()
        self._tau_infinity: Dict[Precision, ZeroRecord] = {}

    def resolve_precision(self, prec: Optional[Precision]) -> Precision:
        return prec or self.prec or default_precision()

    # Family values
    def eval_h(self, t: float, tau: complex, prec: Optional[Precision] = None) -> complex:
        """h_t(tau) = g2^2 - 18 t eta1 g3"""
        if not 0.0 <= t <= 1.0:
            raise InvalidUseError(f"t={t} outside [0, 1]")
        return h_values(t, evaluate(tau, self.resolve_precision(prec))).value

    def eval_fC(self, C: float, tau: complex, prec: Optional[Precision] = None) -> complex:
        if not math.isfinite(C):
            raise InvalidUseError(f"f_C needs a finite C, got {C}")
        return fc_values(C, evaluate(tau, self.resolve_precision(prec))).value

    def eval_phi(self, tau: complex, prec: Optional[Precision] = None) -> Optional[complex]:
        """phi(tau), or None at a pole (|F| within its error bound)"""
        ev = evaluate(tau, self.resolve_precision(prec))
        if abs(ev.critical_form) <= ev.critical_err:
            return None
        return ev.tau + 36j * PI * ev.g3 / ev.critical_form

    def phi_on_half_line(self, b: float, prec: Optional[Precision] = None) -> float:
        """The real function with phi(1/2 + ib) = 1/2 + i * value"""
        ev = evaluate(complex(0.5, b), self.resolve_precision(prec))
        F = ev.critical_form.real
        if abs(F) <= ev.critical_err:
            return math.inf
        return b + 36 * PI * ev.g3.real / F

    def eval_fC_derivative_at_zero(self, C: float, tau: complex, prec: Optional[Precision] = None) -> complex:
        """Closed form -7 g2 (g2^3 - 27 g3^2) / F of f_C' at a zero of f_C"""
        ev = evaluate(tau, self.resolve_precision(prec))
        fv = fc_values(C, ev)
        if abs(fv.value) > settings.PRECISION * fv.scale:
            raise InvalidUseError(
                f"f_C({tau}) = {fv.value:.3e} with C={C} is not a zero (relative {abs(fv.value) / fv.scale:.2e})"
            )
        return -7 * ev.g2 * ev.discriminant / ev.critical_form

    def critical_residual(self, tau: complex, prec: Optional[Precision] = None) -> float:
        fv = critical_values(evaluate(tau, self.resolve_precision(prec)))
        return abs(fv.value) / fv.scale

    def fc_residual(self, C: float, tau: complex, prec: Optional[Precision] = None) -> float:
        fv = fc_values(C, evaluate(tau, self.resolve_precision(prec)))
        return abs(fv.value) / fv.scale

    def functional_equation_residuals(self, C: float, tau: complex, prec: Optional[Precision] = None) -> Dict[str, float]:
        """Relative defects of f_{gC}(g tau) = (c tau + d)^7 / (c C + d) f_C(tau) and of the reflection law"""
        prec = self.resolve_precision(prec)
        base = fc_values(C, evaluate(tau, prec))
        moves = {
            "shift": UnimodularMatrix(a=1, b=-1, c=0, d=1),
            "psi": GAMMA_1,
            "psi2": GAMMA_2,
            "c_over_1_minus_c": UnimodularMatrix(a=1, b=0, c=-1, d=1),
        }
        residuals = {}
        for name, g in moves.items():
            denominator = g.c * C + g.d
            if denominator == 0:
                continue
            moved = fc_values(g.apply(complex(C)).real, evaluate(g.apply(tau), prec))
            expected = g.automorphy(tau) ** 7 / denominator * base.value
            residuals[name] = abs(moved.value - expected) / max(moved.scale, abs(expected))
        reflected = fc_values(1 - C, evaluate(1 - tau.conjugate(), prec))
        residuals["reflection"] = abs(reflected.value + base.value.conjugate()) / reflected.scale
        return residuals

    # Newton
    def newton(
        self,
        family: Callable[[complex], FamilyValue],
        tau: complex,
        accept: Optional[float] = None,
        max_iter: int = 80,
    ) -> Tuple[complex, FamilyValue]:
        """Damped Newton: step clipped to NEWTON_CLIP, halved until |f| decreases, Im tau kept positive"""
        accept = settings.PRECISION if accept is None else accept
        fv = family(tau)
        for iteration in range(max_iter):
            if fv.value == 0:
                return tau, fv
            step = -fv.value / fv.derivative
            if abs(step) <= 4 * MACHINE_EPS * max(1.0, abs(tau)):
                return tau, fv
            if abs(step) > NEWTON_CLIP:
                step *= NEWTON_CLIP / abs(step)
            for _ in range(40):
                candidate = tau + step
                if candidate.imag > 0:
                    trial = family(candidate)
                    if abs(trial.value) < abs(fv.value):
                        break
                step *= 0.5
            else:
                # No descent left: accept if already at the noise floor
                if abs(fv.value) <= accept * fv.scale:
                    return tau, fv
                raise NoConvergenceError(f"Newton stalled at tau={tau} (|f|={abs(fv.value):.3e})")
            tau, fv = candidate, trial
            logger.debug(f"Newton step {iteration}: tau={tau} |f|/scale={abs(fv.value) / fv.scale:.2e}")
        if abs(fv.value) <= accept * fv.scale:
            return tau, fv
        raise NoConvergenceError(f"Newton did not converge from tau={tau} in {max_iter} steps")

    def fc_family(self, C: float, prec: Precision) -> Callable[[complex], FamilyValue]:
        return lambda tau: fc_values(C, evaluate(tau, prec))

    # Counting
    def _family_values(self, family: FamilyParam, prec: Precision) -> Callable[[complex], FamilyValue]:
        if family.kind == FamilyKind.HOMOTOPY_T:
            return lambda tau: h_values(family.value, evaluate(tau, prec))
        if family.is_infinite:
            return lambda tau: critical_values(evaluate(tau, prec))
        return self.fc_family(family.value, prec)

    def _piece_winding(self, piece, family_at, initial: int) -> Tuple[float, complex, int]:
        """Sum of Log increments (imaginary part) and Simpson integral of f'/f over one piece"""
        cache: Dict[float, Tuple[complex, complex]] = {}
        min_width = 1e-10

        def sample(s: float) -> Tuple[complex, complex]:
            if s not in cache:
                tau = complex(piece.point(s))
                fv = family_at(tau)
                if abs(fv.value) <= 1e3 * fv.err:
                    raise BoundaryZeroError(
                        f"|f({tau})| = {abs(fv.value):.3e} is within the error bound on the {piece.label} boundary"
                    )
                cache[s] = (fv.value, fv.derivative / fv.value * complex(piece.tangent(s)))
            return cache[s]

        arg_total = 0.0
        raw_total = 0j
        grid = np.linspace(0.0, 1.0, initial + 1)
        stack = [(float(grid[k]), float(grid[k + 1])) for k in range(initial)]
        while stack:
            a, b = stack.pop()
            m = 0.5 * (a + b)
            fa, ga = sample(a)
            fm, gm = sample(m)
            fb, gb = sample(b)
            left = cmath.log(fm / fa)
            right = cmath.log(fb / fm)
            whole = cmath.log(fb / fa)
            simpson = (b - a) / 6 * (ga + 4 * gm + gb)
            settled = (
                max(abs(left.imag), abs(right.imag), abs(whole.imag)) <= WINDING_ARG_STEP
                and abs((left + right - whole).imag) <= 1e-9
                and abs(simpson - whole) <= 1e-7 + 1e-5 * abs(whole)
            )
            if settled:
                arg_total += whole.imag
                raw_total += simpson
                continue
            if b - a < min_width:
                raise BoundaryZeroError(f"contour refinement collapsed near {complex(piece.point(m))} on {piece.label}")
            stack.append((m, b))
            stack.append((a, m))
        return arg_total, raw_total, len(cache)

    def _winding(self, pieces, family_at, initial: int) -> Tuple[int, complex, float, int]:
        arg_total = 0.0
        raw_total = 0j
        samples = 0
        for piece in pieces:
            arg, raw, count = self._piece_winding(piece, family_at, initial)
            arg_total += arg
            raw_total += raw
            samples += count
        count = int(round(arg_total / (2 * PI)))
        gap = abs(raw_total / (2j * PI) - count)
        return count, raw_total, gap, samples

    def count_zeros(
        self,
        family: FamilyParam,
        domain: DomainName = DomainName.F0,
        height: Optional[float] = None,
        cusp_radius: Optional[float] = None,
        prec: Optional[Precision] = None,
    ) -> ZeroCountReport:
        """Count zeros inside the truncated domain by the argument principle"""
        prec = self.resolve_precision(prec)
        height = settings.CONTOUR_HEIGHT if height is None else height
        cusp_radius = settings.CUSP_RADIUS if cusp_radius is None else cusp_radius
        if height < 5:
            raise InvalidUseError(f"contour height {height} is below 5")
        if not 0 < cusp_radius <= 0.05:
            raise InvalidUseError(f"cusp radius {cusp_radius} outside (0, 0.05]")
        if family.kind == FamilyKind.CURVE_C and family.value in (0.0, 1.0):
            raise InvalidUseError(f"f_C with C={family.value} vanishes on the boundary; use solve_fC")

        pieces = domain_boundary(domain, height, cusp_radius)
        family_at = self._family_values(family, prec)

        initial = WINDING_INITIAL
        previous: Optional[int] = None
        for _ in range(WINDING_ROUNDS):
            count, raw, gap, samples = self._winding(pieces, family_at, initial)
            logger.debug(f"Winding with {initial} initial intervals: count={count} gap={gap:.2e} samples={samples}")
            if count == previous and gap < 0.05:
                break
            previous = count
            initial *= 2
        if gap >= 0.25:
            raise NonIntegralWindingError(f"winding {raw / (2j * PI)} is not near an integer (gap {gap:.3f})")
        if gap >= 0.05:
            logger.warning(f"Zero count {count} settled with integrality gap {gap:.3f}")

        logger.info(f"{family.kind.value}={family.value}: {count} zeros in {domain.value} (T={height}, gap={gap:.1e})")
        return ZeroCountReport(
            count=count,
            family=family,
            domain=domain,
            height=height,
            cusp_radius=cusp_radius if domain == DomainName.F0 else None,
            samples=samples,
            winding_raw=raw,
            integrality_gap=gap,
            # No zero lies in the excised horodiscs: f grows without bound toward 0 and 1
            cusp_caps_zero_free=True,
        )

    # tau_infinity and the homotopy
    def find_tau_infinity(self, prec: Optional[Precision] = None) -> ZeroRecord:
        """The unique zero 1/2 + i b_inf of F in F0, with b_inf in (1/2, sqrt(3)/2)"""
        prec = self.resolve_precision(prec)
        if prec in self._tau_infinity:
            return self._tau_infinity[prec]

        def on_line(b: float) -> float:
            return evaluate(complex(0.5, b), prec).critical_form.real

        low, high = on_line(B_LOW), on_line(B_HIGH)
        if not (low > 0 > high):
            raise NoConvergenceError(f"F does not change sign on [{B_LOW}, {B_HIGH}]: {low:.3e}, {high:.3e}")
        b = brentq(on_line, B_LOW, B_HIGH, xtol=1e-15, rtol=4 * MACHINE_EPS)
        tau, fv = self.newton(lambda z: critical_values(evaluate(z, prec)), complex(0.5, b))
        tau = complex(0.5, tau.imag)
        fv = critical_values(evaluate(tau, prec))
        record = ZeroRecord(
            tau=tau,
            param=FamilyParam(kind=FamilyKind.HOMOTOPY_T, value=1.0),
            residual=abs(fv.value) / fv.scale,
            multiplicity=1,
            half=Half.ON,
            derivative=fv.derivative,
        )
        logger.info(f"tau_infinity = 0.5 + {tau.imag:.12f}i (residual {record.residual:.1e})")
        with self._lock:
            self._tau_infinity[prec] = record
        return record

    def homotopy_zeros(self, t: float, prec: Optional[Precision] = None) -> List[ZeroRecord]:
        """Zeros of h_t in F0; they all sit on Re tau = 1/2"""
        if not 0.0 <= t <= 1.0:
            raise InvalidUseError(f"t={t} outside [0, 1]")
        prec = self.resolve_precision(prec)
        param = FamilyParam(kind=FamilyKind.HOMOTOPY_T, value=t)
        if t == 1.0:
            return [self.find_tau_infinity(prec)]
        if t == 0.0:
            ev = evaluate(RHO, prec)
            fv = h_values(0.0, ev)
            return [ZeroRecord(tau=RHO, param=param, residual=abs(fv.value) / fv.scale, multiplicity=2, half=Half.ON)]

        def on_line(b: float) -> float:
            return h_values(t, evaluate(complex(0.5, b), prec)).value.real

        start, stop, step = HALF_LINE_SCAN
        grid = np.arange(start, stop + step / 2, step)
        values = [on_line(b) for b in grid]
        zeros = []
        for k in range(len(grid) - 1):
            if values[k] == 0 or values[k] * values[k + 1] < 0:
                b = brentq(on_line, grid[k], grid[k + 1], xtol=1e-15, rtol=4 * MACHINE_EPS)
                tau = complex(0.5, b)
                fv = h_values(t, evaluate(tau, prec))
                zeros.append(
                    ZeroRecord(
                        tau=tau,
                        param=param,
                        residual=abs(fv.value) / fv.scale,
                        multiplicity=1,
                        half=Half.ON,
                        derivative=fv.derivative,
                    )
                )
        if len(zeros) != 2:
            raise NoConvergenceError(f"expected two zeros of h_{t} on the half-line, found {len(zeros)}")
        logger.info(f"h_{t} zeros at b = {zeros[0].tau.imag:.10f}, {zeros[1].tau.imag:.10f}")
        return zeros

    # Solving f_C = 0
    def _cusp_seed(self, C: float) -> complex:
        # Invert phi(tau) ~ tau + (i/168 pi) q^-1 - 95i/(28 pi) by fixed-point iteration
        tau = complex(0.25 if C > 0 else 0.75, math.log(168 * PI * abs(C)) / (2 * PI))
        for _ in range(50):
            w = -168j * PI * (C - tau + 95j / (28 * PI))
            nxt = 1j / (2 * PI) * cmath.log(w)
            nxt = complex(nxt.real % 1.0, nxt.imag)
            if abs(nxt - tau) < 1e-13:
                return nxt
            tau = nxt
        return tau

    def _anchor_roots(self, C: float, prec: Precision) -> Tuple[complex, complex]:
        family = self.fc_family(C, prec)
        near, _ = self.newton(family, self._cusp_seed(C))

        tau_inf = self.find_tau_infinity().tau
        ev = evaluate(tau_inf, prec)
        seed = tau_inf + 36j * PI * ev.g3 / (ev.critical_form_prime * (C - tau_inf))
        bounded, _ = self.newton(family, seed)
        logger.debug(f"Anchor C={C}: near-cusp root {near}, bounded root {bounded}")
        return near, bounded

    def _track(self, root: complex, c_from: float, c_to: float, prec: Precision) -> complex:
        fv = fc_values(c_from, evaluate(root, prec))
        # df_C/dC = F, so dtau/dC = -F / f_C'
        slope = -evaluate(root, prec).critical_form / fv.derivative
        predicted = root + (c_to - c_from) * slope
        if predicted.imag <= 0:
            raise NoConvergenceError(f"predictor left the half-plane at C={c_to}")
        tracked, _ = self.newton(self.fc_family(c_to, prec), predicted)
        if abs(tracked - predicted) > max(2 * abs(predicted - root), 1e-2):
            raise NoConvergenceError(f"root jumped from {predicted} to {tracked} at C={c_to}")
        return tracked

    def _continue(
        self, start: float, roots: Tuple[complex, complex], target: float, prec: Precision
    ) -> Tuple[complex, complex]:
        current = start
        ratio = CONTINUATION_RATIO
        while current != target:
            if abs(math.log(target / current)) <= math.log(ratio):
                nxt = target
            elif abs(target) < abs(current):
                nxt = current / ratio
            else:
                nxt = current * ratio
            try:
                moved = tuple(self._track(root, current, nxt, prec) for root in roots)
            except NoConvergenceError:
                ratio = math.sqrt(ratio)
                if ratio - 1 < 1e-6:
                    raise ContinuationStallError(f"continuation in C stalled at C={current}") from None
                continue
            if abs(moved[0] - moved[1]) < COLLISION_TOL:
                raise RootCollisionError(f"roots of f_C collided at C={nxt}")
            roots, current = moved, nxt
            ratio = min(ratio * ratio, CONTINUATION_RATIO)
        return roots

    def _solve_representative(self, R: float, prec: Precision) -> Tuple[complex, complex]:
        with self._lock:
            if R in self._solutions:
                self._solutions.move_to_end(R)
                return self._solutions[R]
            cached = {r: roots for r, roots in self._solutions.items() if (r > 0) == (R > 0)}
        anchor = math.copysign(max(abs(R), ANCHOR_ABS_C), R)
        nearest = min(cached, key=lambda r: abs(math.log(r / R)), default=None)
        if nearest is not None and abs(math.log(nearest / R)) < abs(math.log(anchor / R)):
            start, roots = nearest, cached[nearest]
        else:
            start, roots = anchor, self._anchor_roots(anchor, prec)
        roots = self._continue(start, roots, R, prec)
        with self._lock:
            self._solutions[R] = roots
            while len(self._solutions) > self.cache_size:
                self._solutions.popitem(last=False)
        return roots

    def _record(self, C: float, tau: complex, prec: Precision) -> ZeroRecord:
        ev = evaluate(tau, prec)
        fv = fc_values(C, ev)
        return ZeroRecord(
            tau=tau,
            param=FamilyParam(kind=FamilyKind.CURVE_C, value=C),
            residual=abs(fv.value) / fv.scale,
            multiplicity=1,
            half=half_of(tau),
            derivative=-7 * ev.g2 * ev.discriminant / ev.critical_form,
        )

    def solve_fC(self, C: float, prec: Optional[Precision] = None) -> Tuple[Optional[ZeroRecord], Optional[ZeroRecord]]:
        """(tau_<(C), tau_>(C)): the zeros of f_C in the left and right halves of F0.

        C = 0 has only tau_> = 1/(1 - tau_inf); C = 1 only tau_< = (tau_inf - 1)/tau_inf.
        """
        prec = self.resolve_precision(prec)
        if not math.isfinite(C):
            raise InvalidUseError("solve_fC needs a finite C; the point at C = infinity is tau_infinity")
        if C == 0.0 or C == 1.0:
            tau_inf = self.find_tau_infinity().tau
            if C == 0.0:
                tau, _ = self.newton(self.fc_family(0.0, prec), GAMMA_1.apply(tau_inf))
                return None, self._record(0.0, tau, prec)
            tau, _ = self.newton(self.fc_family(1.0, prec), GAMMA_2.apply(tau_inf))
            return self._record(1.0, tau, prec), None

        R, k = _orbit_representative(C)
        roots = self._solve_representative(R, prec)
        back = _power(GAMMA_2, k)
        family = self.fc_family(C, prec)
        polished = [self.newton(family, back.apply(root))[0] for root in roots]
        if abs(polished[0] - polished[1]) < COLLISION_TOL:
            raise RootCollisionError(f"both roots of f_C at C={C} converged to {polished[0]}")
        polished.sort(key=lambda tau: tau.real)
        lower, upper = (self._record(C, tau, prec) for tau in polished)
        if lower.half != Half.LEFT or upper.half != Half.RIGHT:
            raise NoConvergenceError(f"roots of f_C at C={C} are not split by Re tau = 1/2: {polished}")
        logger.debug(f"C={C}: tau_< = {lower.tau}, tau_> = {upper.tau}")
        return lower, upper

    def critical_points_in_domain(
        self, g: UnimodularMatrix, group: Group, prec: Optional[Precision] = None
    ) -> CriticalPointsReport:
        """Zeros of E6' inside g(F0) (group Gamma0(2)) or g(F) (group SL(2,Z))"""
        prec = self.resolve_precision(prec)
        if group == Group.GAMMA0_2 and not g.is_gamma0_2:
            raise GroupMembershipError(f"{g.model_dump()} is not in Gamma0(2) (c must be even)")
        cusp = g.cusp()
        points: List[complex] = []
        if group == Group.GAMMA0_2:
            if cusp is None:
                points = [self.find_tau_infinity().tau + g.b * g.d]
            else:
                lower, upper = self.solve_fC(float(cusp), prec)
                points = [g.apply(lower.tau), g.apply(upper.tau)]
        elif cusp is not None and not (0 < cusp < 1):
            lower, upper = self.solve_fC(float(cusp), prec)
            points = [g.apply(lower.tau)] if cusp >= 1 else [g.apply(upper.tau)]

        residuals = [self.critical_residual(tau, prec) for tau in points]
        return CriticalPointsReport(
            group=group,
            matrix=g,
            cusp=None if cusp is None else str(cusp),
            points=points,
            residuals=residuals,
        )


# Global instance
critical_locator = CriticalLocator()
