"""Monodromy of y'' = I(z; tau) y on the torus C / (Z + Z tau).

y1 = 1/p'' is an elliptic solution, y2 = y1 chi a second one, with
chi' = 7 / y1^2.  Integration carries y2 - chi(z0) y1, which vanishes at the
base point, so the small increment chi1 is not read off a difference of
large values.  Around z -> z + 1 and z -> z + tau the column
(chi1 y1, y2) transforms by (1 0; 1 1) and (1 0; D 1) with
chi1 = 2F, chi2 = 2(tau F + 36 pi i g3) and D = chi2 / chi1 = phi(tau).
The singular points 0, +-q1, +-q2 (p(q1) = -p(q2) = sqrt(g2/12)) are apparent.
"""
import cmath
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from app.config import settings
from app.contour import Arc, Segment
from app.critical import CriticalLocator, critical_locator
from app.eisenstein import PI, default_precision
from app.errors import G2TooSmallError, NoConvergenceError, OdeStiffnessError, PathTooCloseError
from app.modular import evaluate
from app.models import MACHINE_EPS, EisensteinEval, MonodromyResult, Precision
from app.weierstrass import Lattice, lattice

logger = logging.getLogger(__name__)

G2_FLOOR = 1e-6
BASE_POINT = (0.37, 0.41)
BASE_CLEARANCE = 0.15
DETOUR_RADIUS = 0.08
SEED_GRID = 12
RTOL_FLOOR = 1e-13
RTOL_GAIN = 1e2
ATOL_SHARE = 1e-3

UNIPOTENT = np.array([[1, 0], [1, 1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def _cell_scale(tau: complex) -> float:
    return min(1.0, tau.imag)


class MonodromySolver:
    def __init__(self, locator: Optional[CriticalLocator] = None):
        self.locator = locator or critical_locator

    # Singular points
    def solve_singular_points(self, tau: complex, prec: Optional[Precision] = None) -> Tuple[complex, complex]:
        """q1, q2 in the period cell with p(q1) = sqrt(g2/12), p(q2) = -sqrt(g2/12)"""
        prec = prec or default_precision()
        tau = complex(tau)
        ev = evaluate(tau, prec)
        if abs(ev.E4) < G2_FLOOR:
            raise G2TooSmallError(f"|E4(tau)| = {abs(ev.E4):.2e} at tau={tau}; tau is too close to exp(pi i/3)")
        lat = lattice(tau, prec)
        root = cmath.sqrt(ev.g2 / 12)
        return self._solve_p(lat, root), self._solve_p(lat, -root)

    def _solve_p(self, lat: Lattice, target: complex) -> complex:
        tau = lat.tau
        # Coarse grid over the cell for a seed
        best, seed = math.inf, None
        for x in np.linspace(0.05, 0.95, SEED_GRID):
            for y in np.linspace(0.05, 0.95, SEED_GRID):
                z = complex(x) + y * tau
                gap = abs(lat.values(z).p - target)
                if gap < best:
                    best, seed = gap, z

        z = seed
        for _ in range(60):
            v = lat.values(z)
            step = (v.p - target) / v.p_prime
            if abs(step) > 0.1 * _cell_scale(tau):
                step *= 0.1 * _cell_scale(tau) / abs(step)
            z -= step
            if abs(step) <= 8 * MACHINE_EPS * max(1.0, abs(z)):
                break
        else:
            raise NoConvergenceError(f"Newton for p(q) = {target} at tau={tau} did not converge")

        certificate = abs(lat.p_dprime(lat.values(z).p)) / max(abs(lat.g2), 1.0)
        if certificate > 1e-8:
            raise NoConvergenceError(f"p''(q) = {certificate:.2e} (relative) at q={z}")
        # Representative in the cell spanned by 1 and tau
        m = math.floor(z.imag / tau.imag)
        z -= m * tau
        z -= math.floor(z.real)
        return z

    def _singularities(self, tau: complex, q1: complex, q2: complex, reach: int = 2) -> np.ndarray:
        base = np.array([0, q1, -q1, q2, -q2], dtype=complex)
        shifts = np.array([m * tau + n for m in range(-reach, reach + 1) for n in range(-reach, reach + 1)], dtype=complex)
        return (base[:, None] + shifts[None, :]).ravel()

    # Potential
    def potential(self, z: complex, tau: complex, prec: Optional[Precision] = None) -> complex:
        """I(z) = 12 p(z) + 2 sum_j (p(z - q_j) + p(z + q_j)) + sum_j p'(q_j)^2 / (p(q_j)(p(z) - p(q_j)))"""
        prec = prec or default_precision()
        lat = lattice(complex(tau), prec)
        q1, q2 = self.solve_singular_points(tau, prec)
        p = lat.values(z).p
        total = 12 * p
        for q in (q1, q2):
            at_q = lat.values(q)
            total += 2 * (lat.values(z - q).p + lat.values(z + q).p)
            total += at_q.p_prime ** 2 / (at_q.p * (p - at_q.p))
        return total

    def _direct_potential(self, lat: Lattice, z: complex) -> complex:
        # y1''/y1 for y1 = 1/p''
        v = lat.values(z)
        p2 = lat.p_dprime(v.p)
        p3 = 12 * v.p * v.p_prime
        p4 = 12 * v.p_prime ** 2 + 12 * v.p * p2
        return -p4 / p2 + 2 * p3 ** 2 / p2 ** 2

    def direct_potential(self, z: complex, tau: complex, prec: Optional[Precision] = None) -> complex:
        return self._direct_potential(lattice(complex(tau), prec or default_precision()), complex(z))

    # chi and D
    def chi_and_D(self, tau: complex, prec: Optional[Precision] = None) -> MonodromyResult:
        prec = prec or default_precision()
        tau = complex(tau)
        ev = evaluate(tau, prec)
        chi1 = 2 * ev.critical_form
        chi2 = 2 * (tau * ev.critical_form + 36j * PI * ev.g3)
        infinite = abs(chi1) <= 2 * ev.critical_err
        D = None if infinite else chi2 / chi1

        phi = self.locator.eval_phi(tau, prec)
        if D is not None and phi is not None and abs(D - phi) > 1e-8 * max(1.0, abs(D)):
            logger.warning(f"D={D} and phi={phi} disagree at tau={tau}")
        if (D is None) != (phi is None):
            logger.warning(f"Infinity convention differs between D and phi at tau={tau}")

        try:
            q1, q2 = self.solve_singular_points(tau, prec)
        except G2TooSmallError:
            q1 = q2 = None
        return MonodromyResult(tau=tau, q1=q1, q2=q2, chi1=chi1, chi2=chi2, D=D, D_infinite=infinite, phi=phi)

    # Path integration
    def _route(self, start: complex, end: complex, singular: np.ndarray, radius: float) -> List:
        """Straight path with arcs of the given radius around singular points close to it"""
        length = abs(end - start)
        direction = (end - start) / length
        local = (singular - start) * direction.conjugate()
        along, across = local.real, local.imag
        near = (np.abs(across) < radius) & (along > -radius) & (along < length + radius)

        detours = []
        for t, h, p in sorted(zip(along[near], across[near], singular[near]), key=lambda item: item[0]):
            half = math.sqrt(radius * radius - h * h)
            if t - half <= 0 or t + half >= length:
                raise PathTooCloseError(f"singular point {p} sits at an end of the path {start} -> {end}")
            if detours and t - half <= detours[-1][1]:
                raise PathTooCloseError(f"singular points near {p} are too close to route between")
            detours.append((t - half, t + half, p))

        pieces = []
        position = 0.0
        for enter, leave, p in detours:
            entry = start + enter * direction
            exit_ = start + leave * direction
            if enter > position:
                pieces.append(Segment(start + position * direction, entry))
            theta0 = cmath.phase(entry - p)
            sweep = cmath.phase((exit_ - p) / (entry - p))
            pieces.append(Arc(p, radius, theta0, theta0 + sweep))
            position = leave
        pieces.append(Segment(start + position * direction, end))
        return pieces

    def _integrate(self, lat: Lattice, pieces: Sequence, initial: np.ndarray, rtol: float) -> np.ndarray:
        """Carry the rows (y, y') of each solution along the pieces"""
        state = np.asarray(initial, dtype=complex).ravel()

        for piece in pieces:
            def rhs(s, y, piece=piece):
                z = complex(piece.point(s))
                dz = complex(piece.tangent(s))
                potential = self._direct_potential(lat, z)
                return np.array([y[1] * dz, potential * y[0] * dz, y[3] * dz, potential * y[2] * dz])

            atol = rtol * ATOL_SHARE * max(float(np.abs(state).max()), MACHINE_EPS)
            solution = solve_ivp(rhs, (0.0, 1.0), state, method="DOP853", rtol=rtol, atol=atol)
            if not solution.success:
                raise OdeStiffnessError(f"integration failed on {piece}: {solution.message}")
            state = solution.y[:, -1]
        return state.reshape(2, 2)

    def _base_point(self, tau: complex, singular: np.ndarray) -> complex:
        scale = _cell_scale(tau)
        x0, y0 = BASE_POINT
        for attempt in range(25):
            dx, dy = 0.03 * (attempt % 5), 0.03 * (attempt // 5)
            z0 = complex(x0 + dx) + (y0 + dy) * tau
            if np.abs(singular - z0).min() >= BASE_CLEARANCE * scale:
                return z0
        raise PathTooCloseError(f"no base point keeps {BASE_CLEARANCE} clearance from the singular points at tau={tau}")

    def _basis_data(self, lat: Lattice, z0: complex) -> Tuple[np.ndarray, complex, complex]:
        """Rows (y1, y1') and (y2 - chi(z0) y1, its derivative) at z0, plus chi(z0) and the check chi' - 7/y1^2"""
        v = lat.values(z0)
        p2 = lat.p_dprime(v.p)
        p3 = 12 * v.p * v.p_prime
        y1 = 1 / p2
        y1_prime = -p3 / p2 ** 2
        chi = lat.chi(z0, v)
        defect = lat.chi_prime(v) - 7 / y1 ** 2
        return np.array([[y1, y1_prime], [0, 7 / y1]], dtype=complex), chi, defect

    def _tightened_rtol(self, ev: EisensteinEval, rtol: float) -> float:
        # chi1 = 2F is read against excursions of chi of size |g2|^2
        cancellation = abs(ev.critical_form) / (abs(ev.g2) ** 2 + 18 * abs(ev.eta1 * ev.g3))
        return max(RTOL_FLOOR, rtol * min(1.0, RTOL_GAIN * cancellation))

    def ode_monodromy(self, tau: complex, prec: Optional[Precision] = None, rtol: Optional[float] = None) -> MonodromyResult:
        """chi_and_D plus the transfer matrices along z0 -> z0 + 1 and z0 -> z0 + tau by numerical integration"""
        prec = prec or default_precision()
        rtol = rtol or settings.ODE_RTOL
        tau = complex(tau)
        result = self.chi_and_D(tau, prec)
        if result.q1 is None:
            raise G2TooSmallError(f"singular points undefined at tau={tau}")
        lat = lattice(tau, prec)
        singular = self._singularities(tau, result.q1, result.q2)
        z0 = self._base_point(tau, singular)

        solutions, _, defect = self._basis_data(lat, z0)
        if abs(defect) > 1e-7 * max(1.0, abs(7 / solutions[0, 0] ** 2)):
            logger.warning(f"chi' - 7/y1^2 = {abs(defect):.2e} at z0={z0}")

        check = self.potential(z0, tau, prec)
        direct = self._direct_potential(lat, z0)
        if abs(check - direct) > 1e-6 * max(1.0, abs(direct)):
            logger.warning(f"potential mismatch at z0={z0}: {check} vs {direct}")

        # Basis (k y1, y2 - chi(z0) y1) with k = chi1, or chi2 when chi1 vanishes.  The shift is lower
        # unipotent, so it commutes with the expected matrices
        if result.D_infinite:
            factor = result.chi2
            expected = [IDENTITY2, UNIPOTENT]
        else:
            factor = result.chi1
            expected = [UNIPOTENT, np.array([[1, 0], [result.D, 1]], dtype=complex)]
        to_basis = np.diag([factor, 1.0])

        radius = DETOUR_RADIUS * _cell_scale(tau)
        rtol = self._tightened_rtol(evaluate(tau, prec), rtol)
        matrices, increments = [], []
        for period in (1.0, tau):
            pieces = self._route(z0, z0 + period, singular, radius)
            end = self._integrate(lat, pieces, solutions, rtol)
            w0 = to_basis @ solutions
            w1 = to_basis @ end
            matrices.append(w1 @ np.linalg.inv(w0))
            increments.append(complex(end[1, 0] / end[0, 0]))

        deviation = max(float((np.abs(m - e) / np.maximum(np.abs(e), 1.0)).max()) for m, e in zip(matrices, expected))
        logger.info(f"ODE monodromy at tau={tau}: deviation {deviation:.2e}")
        return result.model_copy(
            update={
                "base_point": z0,
                "ode_matrices": [m.tolist() for m in matrices],
                "ode_deviation": deviation,
                "chi_increments": increments,
            }
        )

    def local_monodromy(self, tau: complex, prec: Optional[Precision] = None, rtol: Optional[float] = None) -> Dict[str, float]:
        """max |M - I| for small loops around 0, +-q1, +-q2"""
        prec = prec or default_precision()
        rtol = rtol or settings.ODE_RTOL
        tau = complex(tau)
        q1, q2 = self.solve_singular_points(tau, prec)
        lat = lattice(tau, prec)
        singular = self._singularities(tau, q1, q2)
        deviations = {}
        for name, center in (("0", 0j), ("q1", q1), ("-q1", -q1), ("q2", q2), ("-q2", -q2)):
            others = singular[np.abs(singular - center) > 1e-9]
            radius = min(DETOUR_RADIUS * _cell_scale(tau), 0.4 * float(np.abs(others - center).min()))
            loop = [Arc(center, radius, 0.0, 2 * PI)]
            end = self._integrate(lat, loop, IDENTITY2, rtol)
            deviations[name] = float(np.abs(end - IDENTITY2).max())
        logger.info(f"Local monodromy at tau={tau}: {deviations}")
        return deviations


# Global instance
monodromy_solver = MonodromySolver()
