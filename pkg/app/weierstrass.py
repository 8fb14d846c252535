"""Weierstrass functions of the lattice Z + Z tau.

z is first moved into the period cell around 0; there

  zeta(z) = eta1 z + pi cot(pi z) + 4 pi sum_k q^k/(1 - q^k) sin(2 pi k z)
  p(z)    = -eta1 + pi^2 / sin^2(pi z) - 8 pi^2 sum_k k q^k/(1 - q^k) cos(2 pi k z)

and zeta picks up m eta2 + n eta1 from the shift by m tau + n.  Lattices
with Im tau below the series floor are rescaled onto the reduced lattice:
p(z; tau) = j^2 p(jz; tau'), zeta -> j zeta, p' -> j^3 p'.
"""
import cmath
import logging
import math
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from app.eisenstein import PI, ROUNDING, tail_bound, default_precision
from app.errors import DomainError, LatticePointError, PrecisionUnreachableError
from app.modular import IDENTITY, evaluate, reduce_to_F
from app.models import EisensteinEval, Precision, WeierstrassEval

logger = logging.getLogger(__name__)

POLE_DISTANCE = 1e-6


class PointValues(NamedTuple):
    p: complex
    p_prime: complex
    zeta: complex


class Lattice:
    """Weierstrass data for one tau; build through ``lattice(tau, prec)``"""

    def __init__(self, tau: complex, prec: Optional[Precision] = None):
        prec = prec or default_precision()
        tau = complex(tau)
        if not tau.imag > 0:
            raise DomainError(f"tau={tau} is not in the upper half-plane")
        self.tau = tau
        self.prec = prec
        self.ev: EisensteinEval = evaluate(tau, prec)
        self.g2 = self.ev.g2
        self.g3 = self.ev.g3

        # Series run on a lattice with Im tau above the floor
        if tau.imag >= prec.min_im_for_series:
            self.gamma, self.base_tau = IDENTITY, tau
        else:
            self.gamma, self.base_tau = reduce_to_F(tau)
        self.scale_factor = self.gamma.automorphy(self.base_tau)
        base = self.ev if self.gamma.is_identity else evaluate(self.base_tau, prec)
        self.base_eta1 = base.eta1
        self.base_eta2 = base.eta2

        # Terms: k^2 |q|^k e^{2 pi k |Im z|} with |Im z| <= Im tau / 2
        ratio = math.exp(-PI * self.base_tau.imag)
        for terms in range(1, prec.max_terms + 1):
            tail = 16 * PI ** 3 * tail_bound(terms, ratio, 2) / (1 - ratio)
            if tail <= prec.target_abs_error:
                break
        else:
            raise PrecisionUnreachableError(f"Weierstrass series at tau={tau} needs more than {prec.max_terms} terms")
        self.terms = terms
        self.tail = tail
        self.k = np.arange(1, terms + 1, dtype=np.float64)
        qk = np.exp(2j * PI * self.k * self.base_tau)
        self.lambert = 1 / (1 - qk)

    def _cell(self, z: complex):
        tau = self.base_tau
        m = round(z.imag / tau.imag)
        shifted = z - m * tau
        n = round(shifted.real)
        return shifted - n, m, n

    def _base_values(self, z: complex) -> PointValues:
        z0, m, n = self._cell(z)
        if abs(z0) < POLE_DISTANCE:
            raise LatticePointError(f"z={z} lies within {POLE_DISTANCE} of a lattice point")
        k = self.k
        tau = self.base_tau
        # q^k e^{+-2 pi i k z} without overflow
        plus = np.exp(2j * PI * k * (tau + z0)) * self.lambert
        minus = np.exp(2j * PI * k * (tau - z0)) * self.lambert
        sine = (plus - minus) / 2j
        cosine = (plus + minus) / 2

        s = cmath.sin(PI * z0)
        c = cmath.cos(PI * z0)
        eta1 = self.base_eta1
        zeta = eta1 * z0 + PI * c / s + 4 * PI * np.sum(sine)
        p = -eta1 + PI ** 2 / s ** 2 - 8 * PI ** 2 * np.sum(k * cosine)
        p_prime = -2 * PI ** 3 * c / s ** 3 + 16 * PI ** 3 * np.sum(k * k * sine)
        zeta += m * self.base_eta2 + n * eta1
        return PointValues(complex(p), complex(p_prime), complex(zeta))

    def values(self, z: complex) -> PointValues:
        j = self.scale_factor
        if self.gamma.is_identity:
            return self._base_values(complex(z))
        base = self._base_values(j * complex(z))
        return PointValues(j * j * base.p, j ** 3 * base.p_prime, j * base.zeta)

    def p_dprime(self, p: complex) -> complex:
        return 6 * p * p - self.g2 / 2

    def chi(self, z: complex, values: Optional[PointValues] = None) -> complex:
        """18 p^2 p' + g2 p' / 2 + 2 g2^2 z - 36 g3 zeta"""
        v = values or self.values(z)
        return 18 * v.p ** 2 * v.p_prime + 0.5 * self.g2 * v.p_prime + 2 * self.g2 ** 2 * z - 36 * self.g3 * v.zeta

    def chi_prime(self, values: PointValues) -> complex:
        p, p1 = values.p, values.p_prime
        p2 = self.p_dprime(p)
        return 18 * (2 * p * p1 * p1 + p * p * p2) + 0.5 * self.g2 * p2 + 2 * self.g2 ** 2 + 36 * self.g3 * p

    def evaluate(self, z: complex) -> WeierstrassEval:
        v = self.values(z)
        j = abs(self.scale_factor)
        magnitude = max(abs(v.p), abs(v.p_prime), abs(v.zeta), 1.0)
        err = self.tail * max(j, 1.0) ** 3 + ROUNDING * magnitude ** 1.5
        return WeierstrassEval(
            z=z,
            tau=self.tau,
            p=v.p,
            p_prime=v.p_prime,
            p_dprime=self.p_dprime(v.p),
            zeta_w=v.zeta,
            err_bound=err,
        )


@lru_cache(maxsize=64)
def lattice(tau: complex, prec: Optional[Precision] = None) -> Lattice:
    return Lattice(tau, prec)


def weierstrass_eval(z: complex, tau: complex, prec: Optional[Precision] = None) -> WeierstrassEval:
    return lattice(complex(tau), prec).evaluate(complex(z))


def cubic_residual(w: WeierstrassEval, g2: complex, g3: complex) -> float:
    """|p'^2 - (4p^3 - g2 p - g3)| relative to the size of the terms"""
    scale = abs(w.p_prime) ** 2 + 4 * abs(w.p) ** 3 + abs(g2 * w.p) + abs(g3)
    return abs(w.p_prime ** 2 - (4 * w.p ** 3 - g2 * w.p - g3)) / scale
