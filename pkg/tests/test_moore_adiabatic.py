"""First-order (adiabatic) Moore functions."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cavsta.moore_adiabatic import AdiabaticMoore, adiabatic_residual
from cavsta.trajectory import make_reference

from util import drop_near, fd_jets


def test_static_branch_is_linear(contraction12):
    am = contraction12.am
    z = np.linspace(-2.0, 0.0, 21)
    # before motion L=0, R=1: both functions reduce to z/d0 (+- anchoring)
    assert_allclose(am.G(z), z, atol=1e-15)
    assert_allclose(am.F(z), z, atol=1e-15)


def test_post_motion_branch_is_linear(contraction12):
    am = contraction12.am
    pair = contraction12.pair
    z = np.linspace(1.2, 3.0, 13)
    slope = np.diff(am.G(z)) / np.diff(z)
    assert_allclose(slope, 1.0 / pair.df, rtol=1e-12)


def test_difference_encodes_boundary_conditions(contraction12):
    """G_ad - F_ad = 1 - (R+L)/(R-L) must hold exactly at every argument."""
    am = contraction12.am
    pair = contraction12.pair
    z = np.linspace(-1.5, 2.5, 301)
    q = (pair.right(z) + pair.left(z)) / (pair.right(z) - pair.left(z))
    assert_allclose(am.G(z) - am.F(z), 1.0 - q, atol=1e-13)


def test_residual_decays_quadratically():
    taus = [8.0, 16.0, 32.0]
    res = []
    for tau in taus:
        pair = make_reference("contraction", L0=0.0, Lf=0.3, R0=1.0, eps=0.3, tau=tau)
        am = AdiabaticMoore.build(pair)
        t = np.linspace(-1.0, tau + 1.0, 500)
        res.append(max(adiabatic_residual(am, t)))
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.25)
    assert res[1] / res[2] == pytest.approx(4.0, rel=0.25)


def test_jets_match_finite_differences(contraction12):
    am = contraction12.am
    z = drop_near(np.linspace(-0.5, 1.7, 91), [0.0, 1.2], 5e-3)
    jet = am.G_jet(z)
    d1, d2, _ = fd_jets(lambda x: am.G(x), z, 5e-4)
    assert_allclose(jet[1], d1, rtol=0, atol=1e-8)
    assert_allclose(jet[2], d2, rtol=0, atol=1e-5)
    _, _, d3 = fd_jets(lambda x: am.G(x), z, 5e-4)
    scale = np.max(np.abs(jet[3]))
    assert_allclose(jet[3], d3, rtol=0, atol=1e-4 * max(1.0, scale))


def test_advance_integral_continuous_at_window_edges(contraction12):
    am = contraction12.am
    for edge in (0.0, 1.2):
        below = am.advance(edge - 1e-9)
        above = am.advance(edge + 1e-9)
        assert abs(above - below) < 1e-7


def test_scalar_and_vector_forms(contraction12):
    am = contraction12.am
    z = np.array([-0.3, 0.4, 1.5])
    vec = am.G(z)
    for zi, vi in zip(z, vec):
        assert am.G(float(zi)) == pytest.approx(vi, rel=0, abs=0)
    assert isinstance(am.G(0.4), float)


def test_kink_arguments_are_trajectory_breaks(contraction12):
    zk, wk = contraction12.am.kink_args(-1.0, 2.0)
    assert_allclose(zk, [0.0, 1.2], atol=0)
    assert_allclose(wk, [0.0, 1.2], atol=0)
    zk, _ = contraction12.am.kink_args(0.5, 1.0)
    assert zk.size == 0


def test_invalid_requests_rejected(contraction12):
    am = contraction12.am
    with pytest.raises(ValueError):
        am.eval("H", 0.0)
    with pytest.raises(ValueError):
        am.eval("G", 0.0, order=4)
