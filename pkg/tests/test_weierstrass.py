import pytest

from app.errors import LatticePointError
from app.weierstrass import cubic_residual, lattice, weierstrass_eval

TAU = 0.3 + 1.2j
POINTS = [0.21 + 0.33j, -0.4 + 0.1j, 0.05 + 0.9j, 0.47 - 0.52j]


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(1.0, abs(b))


def stencil(f, z, h=1e-3):
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)


@pytest.mark.parametrize("z", POINTS)
def test_cubic_relation(z):
    lat = lattice(TAU)
    w = weierstrass_eval(z, TAU)
    assert cubic_residual(w, lat.g2, lat.g3) < 1e-10
    assert w.p_dprime == pytest.approx(6 * w.p ** 2 - lat.g2 / 2)


@pytest.mark.parametrize("z", POINTS)
def test_parity(z):
    lat = lattice(TAU)
    plus, minus = lat.values(z), lat.values(-z)
    assert close(minus.p, plus.p)
    assert close(minus.p_prime, -plus.p_prime)
    assert close(minus.zeta, -plus.zeta)


@pytest.mark.parametrize("z", POINTS)
def test_periods_and_quasi_periods(z):
    lat = lattice(TAU)
    base = lat.values(z)
    for period, eta in ((1.0, lat.ev.eta1), (TAU, lat.ev.eta2)):
        moved = lat.values(z + period)
        assert close(moved.p, base.p)
        assert close(moved.p_prime, base.p_prime, rel=1e-8)
        assert close(moved.zeta, base.zeta + eta)


def test_laurent_expansion_at_the_origin():
    for z in (1e-3, 1e-3j, 7e-4 * (1 + 1j)):
        w = weierstrass_eval(z, TAU)
        assert w.p * z * z == pytest.approx(1.0, abs=1e-9)
        assert w.zeta_w * z == pytest.approx(1.0, abs=1e-9)


def test_lattice_points_are_rejected():
    with pytest.raises(LatticePointError):
        weierstrass_eval(1e-8, TAU)
    with pytest.raises(LatticePointError):
        weierstrass_eval(1 + TAU + 1e-8j, TAU)


def test_lattice_below_the_series_floor():
    tau = 0.1 + 0.2j
    lat = lattice(tau)
    assert not lat.gamma.is_identity
    for z in (0.13 + 0.07j, 0.41 + 0.02j):
        w = weierstrass_eval(z, tau)
        assert cubic_residual(w, lat.g2, lat.g3) < 1e-9
        assert close(lat.values(z + tau).p, w.p, rel=1e-8)
        assert close(lat.values(z + 1).p, w.p, rel=1e-8)
        assert close(lat.values(z + 1).zeta, w.zeta_w + lat.ev.eta1, rel=1e-8)


@pytest.mark.parametrize("z", POINTS[:2])
def test_chi_derivative(z):
    lat = lattice(TAU)
    v = lat.values(z)
    derivative = lat.chi_prime(v)
    assert close(derivative, 7 * lat.p_dprime(v.p) ** 2)
    numeric = stencil(lat.chi, z)
    assert abs(numeric - derivative) < 1e-7 * max(1.0, abs(derivative))
