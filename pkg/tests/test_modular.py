import math

import pytest

from app.eisenstein import eisenstein_service
from app.errors import DomainError
from app.modular import (
    GAMMA_1,
    GAMMA_2,
    INVERSION,
    SHIFT,
    Piece,
    eval_report,
    evaluate,
    in_F,
    in_F0,
    legendre_gap,
    locate_piece,
    mobius_apply,
    random_unimodular,
    reduce_to_F,
    reduce_to_F0,
    transform_eval,
)
from app.models import UnimodularMatrix

RHO = complex(0.5, math.sqrt(3) / 2)


def test_named_matrices():
    tau = 0.3 + 1.5j
    assert GAMMA_1.apply(tau) == pytest.approx(1 / (1 - tau))
    assert GAMMA_2.apply(tau) == pytest.approx((tau - 1) / tau)
    assert (GAMMA_1 @ GAMMA_2).is_identity
    assert (GAMMA_1 @ GAMMA_1 @ GAMMA_1).is_identity
    assert mobius_apply(INVERSION, tau) == pytest.approx(-1 / tau)
    assert mobius_apply(SHIFT, tau) == pytest.approx(tau + 1)


def test_region_predicates():
    assert in_F(2j) and in_F0(2j)
    assert in_F(RHO)
    assert in_F0(0.5 + 0.6j) and not in_F(0.5 + 0.6j)
    assert not in_F0(0.5 + 0.4j)
    assert not in_F0(1.2 + 2j)


def test_locate_piece():
    tau = 0.3 + 1.5j
    assert locate_piece(tau) == Piece.F
    assert locate_piece(GAMMA_1.apply(tau)) == Piece.GAMMA_1
    assert locate_piece(GAMMA_2.apply(tau)) == Piece.GAMMA_2
    assert locate_piece(0.5 + 0.3j) is None


@pytest.mark.parametrize("tau", [0.013 + 0.002j, -3.7 + 0.05j, 0.49 + 0.51j, 12.25 + 4j, 1e-3 + 1e-3j])
def test_reduce_to_F(tau):
    gamma, reduced = reduce_to_F(tau)
    assert in_F(reduced, tol=1e-9)
    assert gamma.apply(reduced) == pytest.approx(tau, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("tau", [0.013 + 0.002j, -3.7 + 0.05j, 0.21 + 0.3j, 0.8 + 0.35j])
def test_reduce_to_F0(tau):
    gamma, reduced = reduce_to_F0(tau)
    assert gamma.is_gamma0_2
    assert in_F0(reduced, tol=1e-9)
    assert gamma.apply(reduced) == pytest.approx(tau, rel=1e-9, abs=1e-12)


def test_reduction_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        reduce_to_F(0.5 - 1j)
    with pytest.raises(DomainError):
        evaluate(0.5 - 1j)


@pytest.mark.parametrize(
    "g",
    [
        INVERSION,
        GAMMA_1,
        GAMMA_2,
        UnimodularMatrix(a=2, b=1, c=1, d=1),
    ],
)
def test_transform_eval_matches_direct_series(g):
    tau = 0.2 + 1.1j
    moved = g.apply(tau)
    assert moved.imag >= 0.3
    pushed = transform_eval(eisenstein_service.evaluate(tau), g)
    direct = eisenstein_service.evaluate(moved)
    assert pushed.tau == pytest.approx(moved)
    for name in ("g2", "g3", "eta1", "eta2"):
        a, b = getattr(pushed, name), getattr(direct, name)
        assert abs(a - b) < 1e-9 * max(1.0, abs(b)), name
    scale = abs(direct.g2) ** 2 + 18 * abs(direct.eta1 * direct.g3)
    assert abs(pushed.critical_form - direct.critical_form) < 1e-9 * scale
    assert abs(pushed.critical_form_prime - direct.critical_form_prime) < 1e-8 * max(
        abs(direct.critical_form_prime), scale
    )


def test_evaluate_reduces_near_the_real_axis():
    tau = 1e-3 + 1e-3j
    ev = evaluate(tau)
    assert ev.tau == pytest.approx(tau)
    assert legendre_gap(ev) < 1e-9 * max(1.0, abs(ev.eta2), abs(tau * ev.eta1))
    assert ev.err_bound > 0


def test_eval_report_flags():
    plain = eval_report(0.5 + 2j)
    assert plain.flags == []
    assert plain.reduction is None
    assert plain.legendre_residual < 1e-12

    vanishing = eval_report(0.5 + 0.8660254j)
    assert "g2_vanishes" in vanishing.flags

    reduced = eval_report(1e-3 + 1e-3j)
    assert "reduced" in reduced.flags
    assert reduced.reduction is not None
    assert reduced.reduction.apply(reduced.reduced_tau) == pytest.approx(1e-3 + 1e-3j, rel=1e-9)
    assert in_F(reduced.reduced_tau, tol=1e-9)


@pytest.mark.parametrize("tau", [0.013 + 0.002j, -3.7 + 0.05j, 0.21 + 0.3j, 12.25 + 4j])
def test_reduction_is_idempotent(tau):
    _, reduced = reduce_to_F(tau)
    again, twice = reduce_to_F(reduced)
    assert again.is_identity and twice == reduced
    _, reduced0 = reduce_to_F0(tau)
    again0, twice0 = reduce_to_F0(reduced0)
    assert again0.is_identity and twice0 == reduced0


def test_random_unimodular(rng):
    for _ in range(200):
        g = random_unimodular(rng)
        assert g.a * g.d - g.b * g.c == 1
        assert max(abs(g.a), abs(g.b), abs(g.c), abs(g.d)) <= 20


def test_transform_laws_under_random_matrices(rng, random_taus):
    for tau in random_taus(100):
        g = random_unimodular(rng)
        pushed = transform_eval(eisenstein_service.evaluate(tau), g)
        direct = evaluate(g.apply(tau))
        for name in ("g2", "g3", "eta1"):
            a, b = getattr(pushed, name), getattr(direct, name)
            assert abs(a - b) < 1e-8 * max(1.0, abs(b)), (g.model_dump(), name)
        scale = abs(direct.g2) ** 2 + 18 * abs(direct.eta1 * direct.g3)
        assert abs(pushed.critical_form - direct.critical_form) < 1e-8 * scale
