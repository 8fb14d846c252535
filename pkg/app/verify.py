"""Acceptance checks run by ``verify``; each returns a VerificationCheck."""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.critical import CriticalLocator, critical_locator
from app.curves import CurveTracer
from app.eisenstein import CRITICAL_PRIME_FACTOR, G2_FACTOR, G3_FACTOR, PI, default_precision, eisenstein_service
from app.errors import E6Error, InvalidUseError
from app.modular import evaluate, in_F, random_unimodular
from app.models import (
    CurveId,
    DenseSampleSpec,
    DomainName,
    FamilyKind,
    FamilyParam,
    Group,
    VerificationCheck,
    VerificationReport,
)
from app.monodromy import MonodromySolver

logger = logging.getLogger(__name__)

B_INFINITY = 0.6341269863
LIMIT_C = -(32 / 3) * PI ** 7 * 1j
LIMIT_T = (16 / 9) * PI ** 8
HOMOTOPY_TIMES = (0.3, 0.5, 0.6, 0.9, 0.99)

# Check name -> AcceptanceSuite method
CHECKS = {
    "tau_infinity": "tau_infinity",
    "counts_F0": "counts_in_F0",
    "counts_F": "counts_in_F",
    "homotopy": "homotopy",
    "identities": "identities",
    "curve_geometry": "curve_geometry",
    "dense_sample": "dense_sample",
    "asymptotics": "asymptotics",
    "monodromy": "monodromy_data",
    "lattice_oracle": "lattice_oracle",
}


def _rel(a: complex, b: complex, floor: float = 1.0) -> float:
    return abs(a - b) / max(abs(b), floor)


def _stencil(f: Callable[[complex], complex], tau: complex, h: float = 1e-3) -> complex:
    """Five-point derivative along the real direction"""
    return (-f(tau + 2 * h) + 8 * f(tau + h) - 8 * f(tau - h) + f(tau - 2 * h)) / (12 * h)


class AcceptanceSuite:
    def __init__(self, seed: int = 0, samples: int = 100, max_denominator: int = 20, locator: Optional[CriticalLocator] = None):
        self.rng = np.random.default_rng(seed)
        self.samples = samples
        self.max_denominator = max_denominator
        self.locator = locator or critical_locator
        self.tracer = CurveTracer(self.locator)
        self.monodromy = MonodromySolver(self.locator)
        self.prec = default_precision()

    def _random_taus(self, count: int) -> List[complex]:
        re = self.rng.uniform(0.0, 1.0, count)
        im = self.rng.uniform(0.8, 3.0, count)
        return [complex(x, y) for x, y in zip(re, im)]

    # Checks
    def tau_infinity(self) -> Tuple[bool, str]:
        record = self.locator.find_tau_infinity()
        error = abs(record.tau.imag - B_INFINITY)
        return error < 1e-8, f"b_inf = {record.tau.imag:.12f} (|error| {error:.1e})"

    def counts_in_F0(self) -> Tuple[bool, str]:
        failures = []
        for C in (-2.0, -0.5, 0.3, 0.7, 1.5, 3.0):
            report = self.locator.count_zeros(FamilyParam(kind=FamilyKind.CURVE_C, value=C), DomainName.F0)
            if report.count != 2 or report.integrality_gap >= 0.05:
                failures.append(f"C={C}: {report.count} (gap {report.integrality_gap:.2e})")
        report = self.locator.count_zeros(FamilyParam(kind=FamilyKind.HOMOTOPY_T, value=1.0), DomainName.F0)
        if report.count != 1 or report.integrality_gap >= 0.05:
            failures.append(f"t=1: {report.count} (gap {report.integrality_gap:.2e})")
        return not failures, "; ".join(failures) or "all counts certified"

    def counts_in_F(self) -> Tuple[bool, str]:
        failures = []
        for C, expected in ((0.25, 0), (0.5, 0), (0.75, 0), (-2.0, 1), (1.5, 1)):
            report = self.locator.count_zeros(FamilyParam(kind=FamilyKind.CURVE_C, value=C), DomainName.F)
            if report.count != expected:
                failures.append(f"C={C}: {report.count} != {expected}")
        _, tau0 = self.locator.solve_fC(0.0)
        tau1, _ = self.locator.solve_fC(1.0)
        if abs(abs(tau0.tau - 1) - 1) > 1e-8:
            failures.append(f"|tau0 - 1| = {abs(tau0.tau - 1):.12f}")
        if abs(abs(tau1.tau) - 1) > 1e-8:
            failures.append(f"|tau1| = {abs(tau1.tau):.12f}")
        return not failures, "; ".join(failures) or "counts and boundary roots as expected"

    def homotopy(self) -> Tuple[bool, str]:
        failures = []
        lower, upper = [], []
        for t in HOMOTOPY_TIMES:
            zeros = self.locator.homotopy_zeros(t)
            b1, b2 = sorted(z.tau.imag for z in zeros)
            lower.append(b1)
            upper.append(b2)
            off_line = max(abs(z.tau.real - 0.5) for z in zeros)
            if not (B_INFINITY < b1 < math.sqrt(3) / 2 < b2) or off_line > 1e-8:
                failures.append(f"t={t}: b1={b1:.6f} b2={b2:.6f}")
        # As t -> 1 the lower zero sinks to tau_infinity and the upper one climbs to the cusp
        if lower != sorted(lower, reverse=True):
            failures.append(f"lower zeros not decreasing in t: {lower}")
        if upper != sorted(upper):
            failures.append(f"upper zeros not increasing in t: {upper}")
        return not failures, "; ".join(failures) or "both zeros on Re tau = 1/2, b_inf < b1 < sqrt(3)/2 < b2"

    def identities(self) -> Tuple[bool, str]:
        worst: Dict[str, float] = {}

        def record(name: str, value: float):
            worst[name] = max(worst.get(name, 0.0), value)

        for tau in self._random_taus(self.samples):
            ev = evaluate(tau, self.prec)
            bundle = eisenstein_service.derivative_bundle(ev)
            record("ramanujan", eisenstein_service.ramanujan_residual(ev) / max(abs(ev.dE6), 1.0))
            record("legendre", eisenstein_service.legendre_residual(ev) / max(abs(ev.eta2), 1.0))
            record("d_eta1", _rel(bundle.eta1, _stencil(lambda z: evaluate(z, self.prec).eta1, tau)))
            record("d_g2", _rel(bundle.g2, _stencil(lambda z: evaluate(z, self.prec).g2, tau), G2_FACTOR))
            record("d_g3", _rel(bundle.g3, _stencil(lambda z: evaluate(z, self.prec).g3, tau), G3_FACTOR))
            record("d_F", _rel(bundle.critical_form, ev.critical_form_prime, CRITICAL_PRIME_FACTOR))

            g = random_unimodular(self.rng)
            moved = evaluate(g.apply(tau), self.prec)
            j = g.automorphy(tau)
            record("weight4", _rel(moved.g2, j ** 4 * ev.g2, abs(j) ** 4 * G2_FACTOR))
            record("weight6", _rel(moved.g3, j ** 6 * ev.g3, abs(j) ** 6 * G3_FACTOR))
            expected_eta1 = j * (g.c * ev.eta2 + g.d * ev.eta1)
            record("eta1_law", _rel(moved.eta1, expected_eta1, abs(j) * (abs(ev.eta1) + abs(g.c * ev.eta2))))
            if g.c != 0:
                C = -g.d / g.c
                pushed = -g.c * j ** 7 * self.locator.eval_fC(C, tau, self.prec)
                scale = abs(moved.g2) ** 2 + 18 * abs(moved.eta1 * moved.g3)
                record("pushforward", abs(moved.critical_form - pushed) / scale)

            C = float(self.rng.uniform(-3.0, 3.0))
            for name, value in self.locator.functional_equation_residuals(C, tau, self.prec).items():
                record(f"fc_{name}", value)

        failing = {name: value for name, value in worst.items() if value >= 1e-8}
        detail = ", ".join(f"{name}={value:.1e}" for name, value in sorted(worst.items()))
        return not failing, detail

    def curve_geometry(self) -> Tuple[bool, str]:
        failures = []
        far, _ = self.locator.solve_fC(1e3)
        if abs(far.tau.real - 0.25) >= 0.02:
            failures.append(f"Re tau_<(1000) = {far.tau.real:.4f}")

        pairs = self.tracer.symmetric_pairs(np.linspace(-3.0, 0.95, 20))
        symmetry = self.tracer.symmetry_check(pairs)
        if symmetry >= 1e-8:
            failures.append(f"symmetry deviation {symmetry:.1e}")

        c2 = self.tracer.trace_curve(CurveId.C2, 0.05, 50.0)
        c3 = self.tracer.trace_curve(CurveId.C3, -50.0, 0.95)
        c1 = self.tracer.trace_curve(CurveId.C1, 1.05, -0.05)
        mapping = self.tracer.c1_mapping_deviation(c2)
        if mapping >= 1e-8:
            failures.append(f"C1 mapping residual {mapping:.1e}")
        cross = self.tracer.c1_cross_check(c1[:: max(1, len(c1) // 10)])
        if cross >= 1e-8:
            failures.append(f"C1 direct-solve deviation {cross:.1e}")
        inside = [p for p in c1 if p.tau.imag <= 10 and in_F(p.tau, tol=-1e-12)]
        if inside:
            failures.append(f"{len(inside)} C1 samples inside F")
        separation = self.tracer.min_separation({CurveId.C1: c1, CurveId.C2: c2, CurveId.C3: c3})
        if not separation > 0:
            failures.append("curves intersect")
        detail = f"Re tau_<(1000)={far.tau.real:.4f}, symmetry={symmetry:.1e}, mapping={mapping:.1e}, separation={separation:.3e}"
        return not failures, "; ".join(failures) or detail

    def dense_sample(self) -> Tuple[bool, str]:
        failures = []
        for group in (Group.GAMMA0_2, Group.SL2Z):
            points = self.tracer.dense_sample(DenseSampleSpec(max_denominator=self.max_denominator, group=group))
            bad = [p for p in points if p.residual >= 1e-8]
            if bad:
                failures.append(f"{group.value}: {len(bad)} residuals >= 1e-8")
            for curve in CurveId:
                members = [p for p in points if p.curve == curve]
                if not members:
                    continue
                stops = [p.C for p in members]
                if curve == CurveId.C1:
                    above = [C for C in stops if C > 1]
                    below = [C for C in stops if C < 0]
                    C_lo = min(above) if above else math.inf
                    C_hi = max(below) if below else math.inf
                else:
                    C_lo, C_hi = min(stops), max(stops)
                polyline = self.tracer.trace_curve(curve, C_lo, C_hi, include=[C for C in stops if math.isfinite(C)])
                distance = float(self.tracer.distance_to_curve(members, polyline).max())
                if distance >= 1e-5:
                    failures.append(f"{group.value}/{curve.value}: {distance:.1e} from the traced curve")
        return not failures, "; ".join(failures) or "all dense points on their curves"

    def asymptotics(self) -> Tuple[bool, str]:
        tau = complex(0.5, 30.0)
        worst = 0.0
        for C in (-2.0, 0.0, 0.5, 1.0, 3.0):
            worst = max(worst, _rel(self.locator.eval_fC(C, tau), LIMIT_C))
        for t in (0.0, 0.5):
            worst = max(worst, _rel(self.locator.eval_h(t, tau), (1 - t) * LIMIT_T))
        return worst < 1e-10, f"max relative deviation {worst:.1e}"

    def monodromy_data(self) -> Tuple[bool, str]:
        failures = []
        taus = []
        while len(taus) < 5:
            tau = self._random_taus(1)[0]
            if abs(evaluate(tau, self.prec).E4) > 1e-2:
                taus.append(tau)
        worst = 0.0
        for tau in taus:
            result = self.monodromy.ode_monodromy(tau, self.prec)
            phi = self.locator.eval_phi(tau, self.prec)
            worst = max(worst, result.ode_deviation)
            if result.ode_deviation >= 1e-5:
                failures.append(f"tau={tau:.4f}: ODE deviation {result.ode_deviation:.1e}")
            if result.D is None or phi is None or _rel(result.D, phi) >= 1e-8:
                failures.append(f"tau={tau:.4f}: D={result.D} phi={phi}")
        at_pole = self.monodromy.chi_and_D(self.locator.find_tau_infinity().tau, self.prec)
        if not at_pole.D_infinite:
            failures.append("D is finite at tau_infinity")
        return not failures, "; ".join(failures) or f"max ODE deviation {worst:.1e}, D = infinity at tau_inf"

    def lattice_oracle(self) -> Tuple[bool, str]:
        worst = 0.0
        for tau in self._random_taus(10):
            ev = evaluate(tau, self.prec)
            G2, G4, G6 = eisenstein_service.lattice_sums(tau)
            worst = max(
                worst,
                _rel(ev.eta1, G2),
                _rel(ev.g2, 60 * G4, G2_FACTOR),
                _rel(ev.g3, 140 * G6, G3_FACTOR),
            )
        return worst < 1e-8, f"max relative deviation {worst:.1e}"

    def checks(self) -> Dict[str, Callable[[], Tuple[bool, str]]]:
        return {name: getattr(self, method) for name, method in CHECKS.items()}

    def _run_one(self, name: str, check: Callable[[], Tuple[bool, str]]) -> VerificationCheck:
        start = time.perf_counter()
        try:
            passed, detail = check()
        except E6Error as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        seconds = time.perf_counter() - start
        level = logging.INFO if passed else logging.ERROR
        logger.log(level, f"{name}: {'ok' if passed else 'FAILED'} ({seconds:.2f}s) {detail}")
        return VerificationCheck(name=name, passed=passed, detail=detail, seconds=seconds)

    def run(self, only: Optional[List[str]] = None) -> VerificationReport:
        unknown = sorted(set(only or []) - set(self.checks()))
        if unknown:
            raise InvalidUseError(f"unknown checks: {', '.join(unknown)}")
        selected = [(name, check) for name, check in self.checks().items() if not only or name in only]
        with ThreadPoolExecutor(max_workers=settings.WORKERS) as pool:
            results = list(pool.map(lambda item: self._run_one(*item), selected))
        return VerificationReport(checks=results)
