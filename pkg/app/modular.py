"""Moebius action, reduction into F and F0, and push-forward of Eisenstein data.

F  = {0 <= Re tau <= 1, |tau| >= 1, |tau - 1| >= 1}       (SL(2,Z))
F0 = {0 <= Re tau <= 1, |tau - 1/2| >= 1/2}                (Gamma0(2))
F0 = F u gamma1(F) u gamma2(F) with gamma1 = (0 1; -1 1), gamma2 = (1 -1; 1 0).
"""
import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from app.eisenstein import PI, TWO_PI_I, eisenstein_service, default_precision
from app.errors import DomainError
from app.models import MACHINE_EPS, EisensteinEval, EvalReport, Precision, UnimodularMatrix

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-12
G2_VANISHING = 1e-6

IDENTITY = UnimodularMatrix.identity()
SHIFT = UnimodularMatrix.translation(1)
INVERSION = UnimodularMatrix(a=0, b=-1, c=1, d=0)
GAMMA_1 = UnimodularMatrix(a=0, b=1, c=-1, d=1)    # tau -> 1/(1 - tau)
GAMMA_2 = UnimodularMatrix(a=1, b=-1, c=1, d=0)    # tau -> (tau - 1)/tau


class Piece(str, Enum):
    F = "F"
    GAMMA_1 = "gamma1F"
    GAMMA_2 = "gamma2F"


def mobius_apply(g: UnimodularMatrix, tau: complex) -> complex:
    return g.apply(complex(tau))


def in_F(tau: complex, tol: float = BOUNDARY_TOL) -> bool:
    return (
        -tol <= tau.real <= 1 + tol
        and abs(tau) >= 1 - tol
        and abs(tau - 1) >= 1 - tol
    )


def in_F0(tau: complex, tol: float = BOUNDARY_TOL) -> bool:
    return -tol <= tau.real <= 1 + tol and abs(tau - 0.5) >= 0.5 - tol


def near_boundary_F(tau: complex, tol: float = BOUNDARY_TOL) -> bool:
    return min(abs(tau.real), abs(tau.real - 1), abs(abs(tau) - 1), abs(abs(tau - 1) - 1)) <= tol


def locate_piece(tau: complex, tol: float = BOUNDARY_TOL) -> Optional[Piece]:
    """Which of F, gamma1(F), gamma2(F) holds tau (None outside F0)"""
    if in_F(tau, tol):
        return Piece.F
    if in_F(GAMMA_1.inverse().apply(tau), tol):
        return Piece.GAMMA_1
    if in_F(GAMMA_2.inverse().apply(tau), tol):
        return Piece.GAMMA_2
    return None


def reduce_to_F(tau: complex, max_iter: int = 10_000) -> Tuple[UnimodularMatrix, complex]:
    """Return (gamma, tau') with tau' in F and gamma . tau' = tau"""
    tau = complex(tau)
    if not tau.imag > 0:
        raise DomainError(f"tau={tau} is not in the upper half-plane")
    if in_F(tau):
        return IDENTITY, tau

    # Classical reduction to |Re| <= 1/2, |z| >= 1; m tracks z = m . tau
    m = IDENTITY
    z = tau
    for _ in range(max_iter):
        shift = math.floor(z.real + 0.5)
        if shift:
            m = UnimodularMatrix.translation(-shift) @ m
            z = m.apply(tau)
        if abs(z) < 1 - MACHINE_EPS:
            m = INVERSION @ m
            z = m.apply(tau)
        else:
            break
    else:
        logger.warning(f"Reduction of {tau} stopped after {max_iter} steps")

    # The classical domain's left half shifts onto the right half of F
    if z.real < 0:
        m = SHIFT @ m
        z = m.apply(tau)
    if near_boundary_F(z):
        logger.debug(f"Reduced point {z} lies on the boundary of F")
    return m.inverse(), z


def random_unimodular(rng: np.random.Generator, bound: int = 20) -> UnimodularMatrix:
    """Random element of SL(2,Z) with every entry in [-bound, bound]"""
    while True:
        c, d = (int(v) for v in rng.integers(-bound, bound + 1, size=2))
        if math.gcd(c, d) != 1:
            continue
        if c == 0:
            a, b = d, int(rng.integers(-bound, bound + 1))
        else:
            # a d = 1 mod |c|, then b from ad - bc = 1
            a = pow(d, -1, abs(c))
            b = (a * d - 1) // c
            k = int(rng.integers(-2, 3))
            if max(abs(a + k * c), abs(b + k * d)) <= bound:
                a, b = a + k * c, b + k * d
        if max(abs(a), abs(b)) <= bound:
            return UnimodularMatrix(a=a, b=b, c=c, d=d)


def _coset_representative(gamma: UnimodularMatrix) -> UnimodularMatrix:
    # Right cosets of Gamma0(2) are told apart by the bottom row mod 2
    parity = (gamma.c % 2, gamma.d % 2)
    if parity == (0, 1):
        return IDENTITY
    if parity == (1, 1):
        return GAMMA_1
    return GAMMA_2


def reduce_to_F0(tau: complex) -> Tuple[UnimodularMatrix, complex]:
    """Return (gamma, tau') with gamma in Gamma0(2), tau' in F0 and gamma . tau' = tau"""
    tau = complex(tau)
    if in_F0(tau):
        return IDENTITY, tau
    gamma, reduced = reduce_to_F(tau)
    rho = _coset_representative(gamma)
    delta = gamma @ rho.inverse()
    image = rho.apply(reduced)
    expected = {IDENTITY: Piece.F, GAMMA_1: Piece.GAMMA_1, GAMMA_2: Piece.GAMMA_2}[rho]
    piece = locate_piece(image)
    if piece != expected:
        logger.debug(f"Coset check: {image} found in {piece}, expected {expected.value} (boundary point)")
    return delta, image


def transform_eval(ev: EisensteinEval, g: UnimodularMatrix) -> EisensteinEval:
    """Bundle at g . tau from the bundle at tau via the weight 4 / 6 laws and the quasi-period law"""
    if g.is_identity:
        return ev
    tau = ev.tau
    j = g.automorphy(tau)
    j6 = j ** 6
    j7 = j6 * j
    j8 = j7 * j

    g2 = j ** 4 * ev.g2
    g3 = j6 * ev.g3
    eta2 = j * (g.a * ev.eta2 + g.b * ev.eta1)
    eta1 = j * (g.c * ev.eta2 + g.d * ev.eta1)

    g3_prime = (-1j / (6 * PI)) * ev.critical_form
    shifted = 36j * PI * g.c
    critical = j8 * ev.critical_form + shifted * j7 * ev.g3
    critical_prime = j * j * (
        8 * g.c * j7 * ev.critical_form
        + j8 * ev.critical_form_prime
        + shifted * (7 * g.c * j6 * ev.g3 + j7 * g3_prime)
    )

    growth = max(1.0, abs(j)) ** 6 * (1 + abs(g.a) + abs(g.b) + abs(g.c) + abs(g.d))
    magnitude = max(abs(g2), abs(g3), abs(eta1), abs(eta2), 1.0)
    err_bound = ev.err_bound * growth + 64 * MACHINE_EPS * magnitude
    critical_err = (
        abs(j8) * ev.critical_err
        + abs(shifted * j7) * ev.err_bound
        + 64 * MACHINE_EPS * (abs(j8 * ev.critical_form) + abs(shifted * j7 * ev.g3))
    )

    E4 = g2 / (4 * PI ** 4 / 3)
    E6 = g3 / (8 * PI ** 6 / 27)
    E2 = eta1 / (PI ** 2 / 3)
    return EisensteinEval(
        tau=g.apply(tau),
        g2=g2,
        g3=g3,
        eta1=eta1,
        eta2=eta2,
        E2=E2,
        E4=E4,
        E6=E6,
        discriminant=g2 ** 3 - 27 * g3 ** 2,
        dE6=critical * 9 / (16j * PI ** 7),
        critical_form=critical,
        critical_form_prime=critical_prime,
        err_bound=err_bound,
        critical_err=critical_err,
        terms=ev.terms,
    )


def evaluate(tau: complex, prec: Optional[Precision] = None) -> EisensteinEval:
    """Eisenstein data at any tau in the upper half-plane, reducing into F when needed"""
    prec = prec or default_precision()
    tau = complex(tau)
    if tau.imag >= prec.min_im_for_series:
        return eisenstein_service.evaluate(tau, prec)
    gamma, reduced = reduce_to_F(tau)
    return transform_eval(eisenstein_service.evaluate(reduced, prec), gamma)


def reduced_evaluate(tau: complex, prec: Optional[Precision] = None) -> Tuple[EisensteinEval, UnimodularMatrix, complex]:
    """Like evaluate, also returning the reduction (gamma, tau') actually used"""
    prec = prec or default_precision()
    tau = complex(tau)
    if tau.imag >= prec.min_im_for_series:
        return eisenstein_service.evaluate(tau, prec), IDENTITY, tau
    gamma, reduced = reduce_to_F(tau)
    return transform_eval(eisenstein_service.evaluate(reduced, prec), gamma), gamma, reduced


def legendre_gap(ev: EisensteinEval) -> float:
    return abs(ev.eta2 - ev.tau * ev.eta1 + TWO_PI_I)


def eval_report(tau: complex, prec: Optional[Precision] = None) -> EvalReport:
    """Evaluation with the reduction used, identity residuals and flags (g2_vanishes, reduced)"""
    ev, gamma, reduced = reduced_evaluate(tau, prec)
    flags = []
    if abs(ev.E4) < G2_VANISHING:
        flags.append("g2_vanishes")
    if not gamma.is_identity:
        flags.append("reduced")
        logger.info(f"tau={tau} evaluated through tau'={reduced} with gamma={gamma.model_dump()}")
    return EvalReport(
        eval=ev,
        reduction=None if gamma.is_identity else gamma,
        reduced_tau=None if gamma.is_identity else reduced,
        legendre_residual=legendre_gap(ev),
        ramanujan_residual=eisenstein_service.ramanujan_residual(ev),
        flags=flags,
    )
