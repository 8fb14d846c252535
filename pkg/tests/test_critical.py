import math

import numpy as np
import pytest

from app.contour import domain_boundary, sample_boundary
from app.critical import RHO, CriticalLocator, critical_locator, critical_values, fc_values, h_values
from app.eisenstein import nome
from app.errors import GroupMembershipError, InvalidUseError
from app.modular import evaluate, in_F, in_F0
from app.models import DomainName, FamilyKind, FamilyParam, Group, Half, UnimodularMatrix

B_INFINITY = 0.6341269863
PI = math.pi


def fc(C):
    return FamilyParam(kind=FamilyKind.CURVE_C, value=C)


def test_tau_infinity(tau_infinity):
    assert tau_infinity.real == 0.5
    assert abs(tau_infinity.imag - B_INFINITY) < 1e-8
    assert critical_locator.critical_residual(tau_infinity) < 1e-10
    assert critical_locator.eval_phi(tau_infinity) is None
    assert math.isinf(critical_locator.phi_on_half_line(tau_infinity.imag))


def test_phi_on_half_line_matches_phi():
    b = 0.58
    value = critical_locator.phi_on_half_line(b)
    phi = critical_locator.eval_phi(complex(0.5, b))
    assert phi.real == pytest.approx(0.5, abs=1e-10)
    assert phi.imag == pytest.approx(value, rel=1e-10)


@pytest.mark.parametrize("C", [-2.0, 3.0])
def test_count_in_F0(locator, C):
    report = locator.count_zeros(fc(C), DomainName.F0)
    assert report.count == 2
    assert report.integrality_gap < 0.05
    assert report.cusp_caps_zero_free


def test_count_for_E6_prime(locator):
    report = locator.count_zeros(FamilyParam(kind=FamilyKind.HOMOTOPY_T, value=1.0), DomainName.F0)
    assert report.count == 1
    assert report.integrality_gap < 0.05


@pytest.mark.parametrize("C,expected", [(0.5, 0), (1.5, 1), (-2.0, 1)])
def test_count_in_F(locator, C, expected):
    report = locator.count_zeros(fc(C), DomainName.F)
    assert report.count == expected
    assert report.cusp_radius is None


def test_count_preconditions(locator):
    with pytest.raises(InvalidUseError):
        locator.count_zeros(fc(3.0), height=4.0)
    with pytest.raises(InvalidUseError):
        locator.count_zeros(fc(3.0), cusp_radius=0.1)
    with pytest.raises(InvalidUseError):
        locator.count_zeros(fc(0.0))


@pytest.mark.parametrize("t", [0.3, 0.5, 0.6, 0.9, 0.99])
def test_homotopy_zeros_straddle_rho(t):
    zeros = critical_locator.homotopy_zeros(t)
    assert len(zeros) == 2
    b1, b2 = sorted(z.tau.imag for z in zeros)
    assert B_INFINITY < b1 < math.sqrt(3) / 2 < b2
    assert all(z.half == Half.ON for z in zeros)


def test_homotopy_zeros_move_apart_as_t_grows():
    pairs = [sorted(z.tau.imag for z in critical_locator.homotopy_zeros(t)) for t in (0.5, 0.9, 0.99)]
    lower = [b1 for b1, _ in pairs]
    upper = [b2 for _, b2 in pairs]
    assert lower == sorted(lower, reverse=True)
    assert upper == sorted(upper)
    assert lower[-1] > B_INFINITY


def test_homotopy_endpoints(tau_infinity):
    start = critical_locator.homotopy_zeros(0.0)
    assert len(start) == 1 and start[0].multiplicity == 2
    assert start[0].tau == RHO
    end = critical_locator.homotopy_zeros(1.0)
    assert end[0].tau == tau_infinity
    with pytest.raises(InvalidUseError):
        critical_locator.homotopy_zeros(1.5)


def test_solve_splits_roots_between_halves(locator):
    lower, upper = locator.solve_fC(3.0)
    assert lower.half == Half.LEFT and upper.half == Half.RIGHT
    assert lower.residual < 1e-8 and upper.residual < 1e-8
    assert in_F0(lower.tau) and in_F0(upper.tau)
    assert locator.eval_phi(lower.tau) == pytest.approx(3.0, abs=1e-8)
    assert locator.eval_phi(upper.tau) == pytest.approx(3.0, abs=1e-8)


def test_reflection_symmetry(locator):
    lower, _ = locator.solve_fC(3.0)
    _, upper = locator.solve_fC(-2.0)
    assert abs(lower.tau - (1 - upper.tau.conjugate())) < 1e-8


def test_large_C_escapes_toward_the_quarter_line(locator):
    lower, upper = locator.solve_fC(1e3)
    assert abs(lower.tau.real - 0.25) < 0.02
    assert lower.tau.imag > 1.0
    # The other root stays near tau_infinity
    assert abs(upper.tau - complex(0.5, B_INFINITY)) < 0.1


def test_boundary_parameters(locator):
    none_lower, tau0 = locator.solve_fC(0.0)
    tau1, none_upper = locator.solve_fC(1.0)
    assert none_lower is None and none_upper is None
    assert abs(abs(tau0.tau - 1) - 1) < 1e-8
    assert abs(abs(tau1.tau) - 1) < 1e-8
    assert tau0.residual < 1e-8 and tau1.residual < 1e-8


def test_solve_rejects_infinite_C(locator):
    with pytest.raises(InvalidUseError):
        locator.solve_fC(math.inf)


def test_derivative_at_zero(locator):
    lower, _ = locator.solve_fC(-0.5)
    closed = locator.eval_fC_derivative_at_zero(-0.5, lower.tau)
    series = fc_values(-0.5, evaluate(lower.tau)).derivative
    assert abs(closed - series) < 1e-8 * abs(series)
    with pytest.raises(InvalidUseError):
        locator.eval_fC_derivative_at_zero(-0.5, lower.tau + 0.05)


def test_functional_equations():
    residuals = critical_locator.functional_equation_residuals(0.7, 0.3 + 1.1j)
    assert set(residuals) == {"shift", "psi", "psi2", "c_over_1_minus_c", "reflection"}
    assert max(residuals.values()) < 1e-8


def test_asymptotic_limits():
    tau = 0.5 + 30j
    limit = -(32 / 3) * PI ** 7 * 1j
    for C in (-2.0, 0.0, 0.5, 1.0, 3.0):
        assert abs(critical_locator.eval_fC(C, tau) - limit) < 1e-10 * abs(limit)
    for t in (0.0, 0.5):
        expected = (16 / 9) * (1 - t) * PI ** 8
        assert abs(critical_locator.eval_h(t, tau) - expected) < 1e-10 * expected


def test_critical_points_in_domain(tau_infinity):
    identity = UnimodularMatrix.identity()
    assert critical_locator.critical_points_in_domain(identity, Group.SL2Z).points == []

    only = critical_locator.critical_points_in_domain(identity, Group.GAMMA0_2)
    assert only.points == [tau_infinity]

    g = UnimodularMatrix(a=1, b=0, c=1, d=1)
    report = critical_locator.critical_points_in_domain(g, Group.SL2Z)
    assert report.cusp == "-1"
    assert len(report.points) == 1
    assert in_F(g.inverse().apply(report.points[0]), tol=1e-9)
    assert report.residuals[0] < 1e-8

    inside = critical_locator.critical_points_in_domain(UnimodularMatrix(a=-1, b=0, c=3, d=-1), Group.SL2Z)
    assert inside.points == []

    h = UnimodularMatrix(a=1, b=0, c=2, d=1)
    pair = critical_locator.critical_points_in_domain(h, Group.GAMMA0_2)
    assert len(pair.points) == 2
    for tau in pair.points:
        assert in_F0(h.inverse().apply(tau), tol=1e-9)

    with pytest.raises(GroupMembershipError):
        critical_locator.critical_points_in_domain(g, Group.GAMMA0_2)


def test_homotopy_error_at_t1_is_that_of_F():
    for tau in (complex(0, 5.2725), 0.5 + 3j, 0.3 + 1.1j):
        ev = evaluate(tau)
        end = h_values(1.0, ev)
        assert end.value == ev.critical_form
        assert end.err == pytest.approx(critical_values(ev).err)
    # High on the left edge F is tiny but still far above its error
    ev = evaluate(complex(0, 5.2725))
    assert abs(h_values(1.0, ev).value) > 1e3 * h_values(1.0, ev).err


def test_count_for_E6_prime_on_a_taller_contour(locator):
    report = locator.count_zeros(FamilyParam(kind=FamilyKind.HOMOTOPY_T, value=1.0), DomainName.F0, height=8.0)
    assert report.count == 1


@pytest.mark.parametrize("C", [-2.0, 0.5, 3.0])
def test_fC_stays_away_from_zero_on_the_F0_boundary(C):
    points = sample_boundary(domain_boundary(DomainName.F0, 12.0, 0.02), per_piece=200)
    for tau in points:
        fv = fc_values(C, evaluate(complex(tau)))
        assert abs(fv.value) > 1e3 * fv.err, tau


def test_phi_on_half_line_changes_sign_only_at_the_pole():
    grid = [b for b in np.linspace(0.5, 5.0, 451) if abs(b - B_INFINITY) > 1e-4]
    signs = [math.copysign(1.0, critical_locator.phi_on_half_line(b)) for b in grid]
    flips = [i for i in range(len(signs) - 1) if signs[i] != signs[i + 1]]
    assert len(flips) == 1
    assert grid[flips[0]] < B_INFINITY < grid[flips[0] + 1]
    assert signs[0] > 0 and signs[-1] < 0


def test_phi_at_rho():
    assert critical_locator.phi_on_half_line(math.sqrt(3) / 2) == pytest.approx(-math.sqrt(3) / 2, abs=1e-8)
    assert critical_locator.eval_phi(RHO) == pytest.approx(complex(0.5, -math.sqrt(3) / 2), abs=1e-8)


def test_phi_near_the_cusp():
    tau = 0.5 + 8j
    expected = tau + 1j / (168 * PI * nome(tau)) - 95j / (28 * PI)
    phi = critical_locator.eval_phi(tau)
    assert abs(phi - expected) < 1e-10 * abs(phi)
    # Lower down the constant term is visible
    tau = 0.5 + 3j
    expected = tau + 1j / (168 * PI * nome(tau)) - 95j / (28 * PI)
    assert abs(critical_locator.eval_phi(tau) - expected) < 1e-4


@pytest.mark.parametrize("C", [-5.0, -1.0, -0.1, 0.1, 0.5, 0.9, 1.1, 2.0, 10.0])
def test_count_in_F0_is_constant_in_C(locator, C):
    report = locator.count_zeros(fc(C), DomainName.F0)
    assert report.count == 2
    assert report.integrality_gap < 0.05


def test_solution_cache_is_bounded():
    small = CriticalLocator(cache_size=2)
    for C in (-2.0, -3.0, 2.0, 3.0):
        small.solve_fC(C)
        assert len(small._solutions) <= 2
    # Most recent representatives are kept
    lower, upper = small.solve_fC(3.0)
    assert lower.residual < 1e-8 and upper.residual < 1e-8
