"""q-expansions of E2, E4, E6 and the Weierstrass data g2, g3, eta1, eta2.

All series are in the nome q = exp(2 pi i tau).  The critical form
F = g2^2 - 18 eta1 g3 has no constant term and is summed from its own
expansion 1792 pi^8 sum n sigma_5(n) q^n, so it keeps full relative
accuracy where g2^2 and 18 eta1 g3 nearly cancel.
"""
import cmath
import logging
import math
import threading
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from app.config import settings
from app.errors import DomainError, PrecisionUnreachableError
from app.models import MACHINE_EPS, EisensteinEval, Precision

logger = logging.getLogger(__name__)

PI = math.pi
TWO_PI_I = 2j * PI
G2_FACTOR = 4 * PI ** 4 / 3
G3_FACTOR = 8 * PI ** 6 / 27
ETA1_FACTOR = PI ** 2 / 3
CRITICAL_FACTOR = 1792 * PI ** 8
CRITICAL_PRIME_FACTOR = 2 * PI * CRITICAL_FACTOR
DE6_FACTOR = 1008 * PI

ZETA3 = 1.2020569031595942
ZETA5 = 1.0369277551433699

ROUNDING = 64 * MACHINE_EPS


def default_precision() -> Precision:
    return Precision(
        target_abs_error=settings.SERIES_TARGET,
        max_terms=settings.MAX_TERMS,
        min_im_for_series=settings.MIN_IM_FOR_SERIES,
    )


class DerivativeBundle(NamedTuple):
    g2: complex
    g3: complex
    eta1: complex
    critical_form: complex


def tail_bound(terms: int, ratio: float, power: int, log_factor: bool = False) -> float:
    """Bound on sum_{m > terms} m^power (1 + ln m)^[log_factor] ratio^m."""
    m = terms + 1
    first = m ** power * ratio ** m
    if log_factor:
        first *= 1 + math.log(m)
    growth = ratio * ((m + 1) / m) ** (power + (1 if log_factor else 0))
    if growth >= 1:
        return math.inf
    return first / (1 - growth)


def _fsum(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


class DivisorSums:
    """sigma_k(n) for k in (1, 3, 5), rebuilt behind a lock when a longer table is needed."""

    def __init__(self):
        self._lock = threading.Lock()
        self._capacity = 0
        self._table: Dict[int, np.ndarray] = {}

    def table(self, n_max: int) -> Dict[int, np.ndarray]:
        if n_max > self._capacity:
            with self._lock:
                if n_max > self._capacity:
                    self._build(max(n_max, 2 * self._capacity, 64))
        return self._table

    def _build(self, capacity: int):
        table = {}
        for k in (1, 3, 5):
            sigma = np.zeros(capacity + 1, dtype=np.float64)
            for divisor in range(1, capacity + 1):
                sigma[divisor::divisor] += float(divisor) ** k
            table[k] = sigma
        logger.debug(f"Divisor-sum sieve built up to n={capacity}")
        self._table = table
        self._capacity = capacity


class EisensteinService:
    def __init__(self):
        self.divisor_sums = DivisorSums()

    def terms_needed(self, ratio: float, prec: Precision) -> int:
        """Smallest N whose tails (weighted as in E2, E4 and the n^2-weighted E6 series) meet the target"""
        for terms in range(1, prec.max_terms + 1):
            worst = max(
                24 * tail_bound(terms, ratio, 1, log_factor=True),
                240 * ZETA3 * tail_bound(terms, ratio, 3),
                504 * ZETA5 * tail_bound(terms, ratio, 7),
            )
            if worst <= prec.target_abs_error:
                return terms
        raise PrecisionUnreachableError(
            f"|q|={ratio:.3g}: tail bound misses {prec.target_abs_error:.1e} within {prec.max_terms} terms"
        )

    def evaluate(self, tau: complex, prec: Optional[Precision] = None) -> EisensteinEval:
        """Series evaluation at tau; tau must already sit above the series floor."""
        prec = prec or default_precision()
        tau = complex(tau)
        if not tau.imag > 0:
            raise DomainError(f"tau={tau} is not in the upper half-plane")
        if tau.imag < prec.min_im_for_series:
            raise DomainError(
                f"Im tau={tau.imag:.3g} is below min_im_for_series={prec.min_im_for_series}; reduce it first"
            )

        ratio = math.exp(-2 * PI * tau.imag)
        terms = self.terms_needed(ratio, prec)
        sigma = self.divisor_sums.table(terms)
        n = np.arange(1, terms + 1, dtype=np.float64)
        shifted = complex(tau.real - math.floor(tau.real), tau.imag)
        qn = np.exp(TWO_PI_I * n * shifted)

        s1 = _fsum(sigma[1][1:terms + 1] * qn)
        s3 = _fsum(sigma[3][1:terms + 1] * qn)
        weighted5 = sigma[5][1:terms + 1] * qn
        s5 = _fsum(weighted5)
        s5_n = _fsum(n * weighted5)
        s5_nn = _fsum(n * n * weighted5)

        E2 = 1 - 24 * s1
        E4 = 1 + 240 * s3
        E6 = 1 - 504 * s5
        g2 = G2_FACTOR * E4
        g3 = G3_FACTOR * E6
        eta1 = ETA1_FACTOR * E2
        eta2 = tau * eta1 - TWO_PI_I
        critical = CRITICAL_FACTOR * s5_n
        critical_prime = 1j * CRITICAL_PRIME_FACTOR * s5_nn

        tail1 = 24 * tail_bound(terms, ratio, 1, log_factor=True)
        tail3 = 240 * ZETA3 * tail_bound(terms, ratio, 3)
        tail5 = 504 * ZETA5 * tail_bound(terms, ratio, 5)
        magnitude = max(abs(g2), abs(g3), abs(eta1), abs(eta2), 1.0)
        err_bound = max(
            tail1 * max(ETA1_FACTOR, 1.0) * max(abs(tau), 1.0),
            tail3 * G2_FACTOR,
            tail5 * G3_FACTOR,
        ) + ROUNDING * magnitude
        critical_err = (
            CRITICAL_FACTOR * ZETA5 * tail_bound(terms, ratio, 6)
            + ROUNDING * (abs(critical) + CRITICAL_FACTOR * ratio)
        )

        return EisensteinEval(
            tau=tau,
            g2=g2,
            g3=g3,
            eta1=eta1,
            eta2=eta2,
            E2=E2,
            E4=E4,
            E6=E6,
            discriminant=g2 ** 3 - 27 * g3 ** 2,
            dE6=-1j * DE6_FACTOR * s5_n,
            critical_form=critical,
            critical_form_prime=critical_prime,
            err_bound=err_bound,
            critical_err=critical_err,
            terms=terms,
        )

    def derivative_bundle(self, ev: EisensteinEval) -> DerivativeBundle:
        """Closed-form tau-derivatives of g2, g3, eta1 and F = g2^2 - 18 eta1 g3"""
        g2, g3, eta1 = ev.g2, ev.g3, ev.eta1
        return DerivativeBundle(
            g2=(1j / PI) * (2 * eta1 * g2 - 3 * g3),
            g3=(-1j / (6 * PI)) * (g2 ** 2 - 18 * eta1 * g3),
            eta1=(1j / (24 * PI)) * (12 * eta1 ** 2 - g2),
            critical_form=(7j / (4 * PI)) * (4 * eta1 * g2 ** 2 - 36 * eta1 ** 2 * g3 - 3 * g2 * g3),
        )

    def ramanujan_residual(self, ev: EisensteinEval) -> float:
        """|pi i (E2 E6 - E4^2) - E6'| with E6' from the differentiated series"""
        return abs(1j * PI * (ev.E2 * ev.E6 - ev.E4 ** 2) - ev.dE6)

    def legendre_residual(self, ev: EisensteinEval) -> float:
        return abs(ev.eta2 - ev.tau * ev.eta1 + TWO_PI_I)

    def lattice_sums(self, tau: complex, rows: int = 30, cols: int = 400) -> Tuple[complex, complex, complex]:
        """(G2, G4, G6) summed directly over m tau + n.

        Each row m is summed over |n| <= cols and closed with an Euler-Maclaurin
        tail; rows are added in Eisenstein order (inner sum over n first), which
        fixes the value of the conditionally convergent weight-2 sum.
        """
        tau = complex(tau)
        if not tau.imag > 0:
            raise DomainError(f"tau={tau} is not in the upper half-plane")
        m = np.arange(-rows, rows + 1)
        n = np.arange(-cols, cols + 1)
        shift = m * tau
        omega = shift[:, None] + n[None, :]
        origin = (m == 0)[:, None] & (n == 0)[None, :]
        omega = np.where(origin, 1.0, omega)
        edge = cols + 0.5
        sums = []
        for weight in (2, 4, 6):
            terms = np.where(origin, 0.0, omega ** (-weight))
            tail = (
                ((edge + shift) ** (1 - weight) + (edge - shift) ** (1 - weight)) / (weight - 1)
                - weight / 24 * ((edge + shift) ** (-weight - 1) + (edge - shift) ** (-weight - 1))
            )
            row_sums = terms.sum(axis=1) + tail
            sums.append(_fsum(row_sums))
        return sums[0], sums[1], sums[2]


def nome(tau: complex) -> complex:
    return cmath.exp(TWO_PI_I * tau)


# Global instance
eisenstein_service = EisensteinService()
