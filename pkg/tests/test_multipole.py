import numpy as np
import pytest
from hypothesis import given, strategies as st

from lightcone.errors import DomainError
from lightcone.multipole import (COORDINATES, ExpansionPoint, central_difference_gradient,
                                 certificate, first_order_ratio, kernel,
                                 multipole_ratio_bound, propagator_taylor_coefficients)


def test_time_partials_vanish():
    c = propagator_taylor_coefficients(ExpansionPoint(3.0, 0.1))
    assert c.d_t1 == 0 and c.d_t2 == 0


def test_r2_value(frozen):
    c = propagator_taylor_coefficients(ExpansionPoint(2.0, 0.1))
    assert c.d_z1 == frozen["taylor_dz1_r2"]
    assert c.d_z2 == 0.25
    assert c.value == 0.25 == kernel(ExpansionPoint(2.0, 0.1).centre())


@given(st.floats(0.1, 1e3), st.floats(1e-6, 0.5))
def test_partials_match_central_differences(r, frac):
    pt = ExpansionPoint(r, r * frac)
    an = propagator_taylor_coefficients(pt).gradient()
    fd = central_difference_gradient(pt)
    nz = an != 0
    assert np.all(np.abs(fd[nz] - an[nz]) <= 1e-6 * np.abs(an[nz]))
    assert np.all(np.abs(fd[~nz]) <= 1e-6 * 2 / r**3)
    assert len(COORDINATES) == len(an)


def test_bound_values():
    assert multipole_ratio_bound(ExpansionPoint(1.0, 1e-4)) == pytest.approx(2e-4, rel=1e-15)
    assert multipole_ratio_bound(ExpansionPoint(1e12, 1.0)) < 1e-11


@given(st.floats(1.0, 1e4), st.floats(1e-6, 0.25))
def test_bound_linear_in_extent(r, frac):
    d = r * frac
    assert multipole_ratio_bound(ExpansionPoint(r, 2 * d)) == 2 * multipole_ratio_bound(
        ExpansionPoint(r, d))
    assert multipole_ratio_bound(ExpansionPoint(r, d)) == 2 * d / r


@given(st.floats(1.0, 1e3), st.floats(1e-6, 0.4),
       st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.sampled_from([0, 4]))
def test_bound_dominates_single_atom_excursion(r, frac, u, offset):
    pt = ExpansionPoint(r, r * frac)
    disp = np.zeros(8)
    v = np.array(u)
    if np.linalg.norm(v) > 0:
        disp[offset:offset + 3] = v / max(np.linalg.norm(v), 1.0) * pt.d_a
    assert first_order_ratio(pt, disp) <= multipole_ratio_bound(pt) * (1 + 1e-12)


def test_both_atoms_at_most_twice_bound():
    pt = ExpansionPoint(1.0, 0.01)
    disp = np.array([0, 0, 0.01, 0, 0, 0, -0.01, 0])
    assert first_order_ratio(pt, disp) == pytest.approx(2 * multipole_ratio_bound(pt))


@pytest.mark.parametrize("r,d", [(1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (0.0, 0.0)])
def test_domain(r, d):
    with pytest.raises(DomainError):
        ExpansionPoint(r, d)


def test_certificate():
    b, ok = certificate(1000.0, 0.01)
    assert ok and b == 2e-5
    assert not certificate(10.0, 0.01)[1]
