import math

import numpy as np
import pytest

from app.contour import Arc, Segment, domain_boundary, sample_boundary
from app.models import DomainName


def signed_area(points):
    x, y = points.real, points.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@pytest.mark.parametrize("domain", [DomainName.F0, DomainName.F])
def test_boundary_is_closed(domain):
    pieces = domain_boundary(domain, 12.0, 0.02)
    for first, second in zip(pieces, pieces[1:] + pieces[:1]):
        assert abs(complex(first.point(1.0)) - complex(second.point(0.0))) < 1e-12


@pytest.mark.parametrize("domain", [DomainName.F0, DomainName.F])
def test_boundary_runs_counterclockwise(domain):
    points = sample_boundary(domain_boundary(domain, 6.0, 0.02), per_piece=400)
    assert signed_area(points) > 0


def test_area_matches_truncated_F():
    height = 6.0
    f_points = sample_boundary(domain_boundary(DomainName.F, height, 0.02), per_piece=2000)
    # Area under the two floor arcs of F
    floor = math.sqrt(3) / 4 + math.pi / 6
    assert signed_area(f_points) == pytest.approx(height - floor, rel=1e-4)


def test_f0_caps_touch_the_floor_circle():
    pieces = domain_boundary(DomainName.F0, 12.0, 0.03)
    labels = [piece.label for piece in pieces]
    assert labels == ["left", "cap0", "floor", "cap1", "right", "top"]
    cap0 = pieces[1]
    end = complex(cap0.point(1.0))
    assert abs(end - 0.5) == pytest.approx(0.5)
    assert abs(end - 0.03j) == pytest.approx(0.03)


def test_tangents_match_difference_quotients():
    pieces = [Segment(0.1 + 1j, 0.9 + 2j), Arc(0.5 + 0j, 0.5, 0.3, 2.5)]
    h = 1e-6
    for piece in pieces:
        for s in (0.2, 0.5, 0.8):
            numeric = (complex(piece.point(s + h)) - complex(piece.point(s - h))) / (2 * h)
            assert complex(piece.tangent(s)) == pytest.approx(numeric, rel=1e-8)


def test_lengths():
    assert Segment(0j, 3 + 4j).length == pytest.approx(5.0)
    assert Arc(0j, 2.0, 0.0, math.pi).length == pytest.approx(2 * math.pi)


def test_pieces_accept_arrays():
    arc = Arc(0j, 1.0, 0.0, math.pi / 2)
    s = np.linspace(0.0, 1.0, 5)
    values = arc.point(s)
    assert values.shape == (5,)
    assert np.allclose(np.abs(values), 1.0)
    assert Segment(0j, 1j).tangent(s).shape == (5,)
