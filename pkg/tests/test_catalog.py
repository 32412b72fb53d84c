"""Catalog spaces: kernels, closed-form geometry vs the FD oracle."""

import math

import numpy as np
import pytest

from cohk.core import DomainError, gram, psd_check
from cohk.catalog import (
    DeBrangesSpace,
    SchurSpace,
    commutation_check,
    fd_L,
    fd_LR,
    fd_R,
    geometry_report,
    infinitesimal_cs_margin,
    make_space,
    metric_g,
    one_form_theta,
    potential_inequality_check,
    space_names,
    two_form_omega,
    wtg_matrix,
)


def test_catalog_has_eight_spaces():
    assert len(space_names()) == 8


def test_make_space_from_descriptor_dict():
    sp = make_space({"kind": "euclidean", "dim": 3})
    assert sp.coord_len == 3


def test_make_space_unknown_kind():
    with pytest.raises(DomainError):
        make_space("banach")


def test_klauder_kernel_formula(rng):
    sp = make_space("klauder", dim=1)
    z = sp.sample_point(rng)
    zp = sp.sample_point(rng)
    expected = np.exp(np.conj(z[0]) + zp[0] + np.conj(z[1]) * zp[1])
    assert sp.kernel(z, zp) == pytest.approx(expected)


def test_debranges_exp_is_sinc_on_reals():
    sp = make_space("debranges", preset="exp")
    x, xp = 0.7, -0.4
    assert sp.kernel(x, xp) == pytest.approx(math.sin(x - xp) / (x - xp))
    # Paley-Wiener: the sinc Gram over real samples is PSD
    g = gram(sp, [-2.0, -0.5, 0.3, 1.1, 2.4])
    assert psd_check(g).passed


def test_debranges_diagonal_branch_continuity():
    sp = make_space("debranges", preset="damped-linear")
    x = 0.8
    near = sp.kernel(x, x + 3e-9)
    at = sp.kernel(x, x)
    assert at == pytest.approx(2.0 + x * x, rel=1e-10)
    assert near == pytest.approx(at, rel=1e-6)


def test_schur_rejects_non_schur_map():
    with pytest.raises(DomainError):
        SchurSpace(lambda z: 2.0 * z, lambda z: 2.0)


def test_debranges_rejects_bad_structure_function():
    # E = e^{+iz} grows in the lower half-plane instead
    with pytest.raises(DomainError):
        DeBrangesSpace(lambda z: np.exp(1j * z), lambda z: 1j * np.exp(1j * z))


def test_schur_zero_map_reduces_to_szego(rng):
    schur = SchurSpace(lambda z: 0.0 * z, lambda z: 0.0 * z)
    szego = make_space("szego")
    z, zp = szego.sample_points(rng, 2)
    assert schur.kernel(z, zp) == pytest.approx(szego.kernel(z, zp))
    X, Y = 0.3 + 0.1j, -0.2 + 0.4j
    assert schur.mixed_form(z, X, Y) == pytest.approx(szego.mixed_form(z, X, Y))


def test_schur_mobius_kernel_is_rank_one(rng):
    # 1 - conj(s(z))s(z') = 3(1 - conj(z)z')/(conj(z+2)(z'+2)), so the
    # kernel factors as conj(g(z))g(z') with g = sqrt(3)/(z+2): the
    # infinitesimal Cauchy-Schwarz inequality is an equality everywhere
    sp = make_space("schur", preset="mobius")
    z, zp = sp.sample_points(rng, 2)
    g = lambda w: math.sqrt(3.0) / (w + 2.0)
    assert sp.kernel(z, zp) == pytest.approx(np.conj(g(z)) * g(zp))
    X = sp.sample_tangent(z, rng)
    assert infinitesimal_cs_margin(sp, z, X) == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.det(wtg_matrix(sp, z, X)) == pytest.approx(0.0, abs=1e-12)


def test_fd_r_klauder_vanishes_at_origin():
    sp = make_space("klauder", dim=1)
    z = np.zeros(2, dtype=complex)
    X = np.array([0.0, 1.0], dtype=complex)
    assert fd_R(sp, sp.kernel, z, z, X) == pytest.approx(0.0, abs=1e-9)


def test_fd_on_constant_function(space, rng):
    z = space.sample_point(rng)
    X = space.sample_tangent(z, rng)
    const = lambda a, b: 1.0 + 0.0j
    assert fd_L(space, const, z, z, X) == pytest.approx(0.0, abs=1e-12)
    assert fd_R(space, const, z, z, X) == pytest.approx(0.0, abs=1e-12)


def test_fd_r_szego_origin():
    sp = make_space("szego")
    assert fd_R(sp, sp.kernel, 0.0, 0.0, 1.0) == pytest.approx(0.0, abs=1e-10)


def test_fd_lr_examples(rng):
    # the mixed stencil carries ~1e-6 relative roundoff, so 1e-5 here
    kl = make_space("klauder", dim=1)
    X = np.array([0.0, 1.0], dtype=complex)
    assert fd_LR(kl, np.zeros(2, complex), X, X) == pytest.approx(1.0, rel=1e-5)

    eu = make_space("euclidean", dim=2)
    e1 = np.array([1.0, 0.0])
    assert fd_LR(eu, eu.sample_point(rng), e1, e1) == pytest.approx(1.0, rel=1e-5)

    sz = make_space("szego")
    assert fd_LR(sz, 0.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-5)


def test_theta_euclidean_example():
    sp = make_space("euclidean", dim=2)
    got = one_form_theta(sp, np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    assert got == pytest.approx(11.0)


def test_metric_klauder_example():
    sp = make_space("klauder", dim=1)
    X = np.array([0.0, 1.0], dtype=complex)
    assert metric_g(sp, np.zeros(2, complex), X, X) == pytest.approx(1.0)


def test_omega_alternating(space, rng):
    z = space.sample_point(rng)
    X = space.sample_tangent(z, rng)
    assert two_form_omega(space, z, X, X) == pytest.approx(0.0, abs=1e-10)
    Y = space.sample_tangent(z, rng)
    assert two_form_omega(space, z, X, Y) == pytest.approx(
        -two_form_omega(space, z, Y, X)
    )


def test_metric_symmetric_and_nonnegative(space, rng):
    z = space.sample_point(rng)
    X = space.sample_tangent(z, rng)
    Y = space.sample_tangent(z, rng)
    assert metric_g(space, z, X, Y) == pytest.approx(metric_g(space, z, Y, X))
    scale = max(1.0, abs(space.kernel(z, z)))
    assert metric_g(space, z, X, X).real >= -1e-9 * scale


def test_geometry_closed_matches_fd(space, rng):
    for _ in range(6):
        z = space.sample_point(rng)
        X = space.sample_tangent(z, rng)
        Y = space.sample_tangent(z, rng)
        rep = geometry_report(space, z, X, Y)
        assert rep.provenance in ("closed", "fd")
        if rep.provenance == "closed":
            assert max(rep.rel_discrepancies[:2]) < 1e-5


def test_geometry_fd_fallback_near_real_axis():
    sp = make_space("debranges", preset="exp")
    rep = geometry_report(sp, 0.5 + 1e-6j, 1.0, 1.0j)
    assert rep.provenance == "fd"
    assert rep.g_closed == rep.g_fd


def test_lxrxk_real_nonnegative(space, rng):
    for _ in range(5):
        z = space.sample_point(rng)
        X = space.sample_tangent(z, rng)
        v = fd_LR(space, z, X, X)
        scale = max(1.0, abs(space.kernel(z, z)))
        assert abs(v.imag) <= 1e-9 * scale
        assert v.real >= -1e-9 * scale


def test_infinitesimal_cs_examples():
    eu = make_space("euclidean", dim=2)
    assert infinitesimal_cs_margin(eu, np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0, rel=1e-6)
    assert infinitesimal_cs_margin(eu, np.array([1.0, 0.0]), np.zeros(2)) == pytest.approx(0.0, abs=1e-12)
    assert infinitesimal_cs_margin(make_space("szego"), 0.0, 1.0) == pytest.approx(1.0, rel=1e-6)


def test_infinitesimal_cs_nonnegative(space, rng):
    for _ in range(5):
        z = space.sample_point(rng)
        X = space.sample_tangent(z, rng)
        scale = max(1.0, abs(space.kernel(z, z)) ** 2)
        assert infinitesimal_cs_margin(space, z, X) >= -1e-8 * scale


def test_wtg_matrix_examples(rng):
    eu = make_space("euclidean", dim=2)
    z = np.array([1.0, 0.0])
    m = wtg_matrix(eu, z, np.zeros(2))
    assert m[0, 0] == pytest.approx(1.0) and abs(m[0, 1]) < 1e-12

    m = wtg_matrix(eu, z, np.array([1.0, 0.0]))
    assert np.allclose(m, np.ones((2, 2)), atol=1e-7)

    kl = make_space("klauder", dim=1)
    m = wtg_matrix(kl, np.zeros(2, complex), np.array([0.0, 1.0], complex))
    assert np.allclose(m, np.eye(2), atol=1e-7)


def test_wtg_matrix_psd(space, rng):
    for _ in range(5):
        z = space.sample_point(rng)
        X = space.sample_tangent(z, rng)
        assert psd_check(wtg_matrix(space, z, X), tol_rel=1e-7, tol_abs=1e-8).passed


def test_potential_inequalities_klauder():
    sp = make_space("klauder", dim=1)
    X = np.array([0.0, 1.0], dtype=complex)
    rep = potential_inequality_check(sp, np.zeros(2, complex), X)
    assert not rep.skipped
    assert rep.ifcs_margin == pytest.approx(1.0, rel=1e-5)
    assert rep.fbar_residual < 1e-8


def test_potential_inequalities_zero_field(space, rng):
    z = space.sample_point(rng)
    rep = potential_inequality_check(space, z, 0.0 * np.asarray(space.sample_tangent(z, rng)))
    assert not rep.skipped
    assert rep.worst == pytest.approx(0.0, abs=1e-10)


def test_potential_inequalities_szego_origin():
    rep = potential_inequality_check(make_space("szego"), 0.0, 1.0)
    assert rep.ifcs_margin == pytest.approx(1.0, rel=1e-5)


def test_potential_inequalities_hold(space, rng):
    for _ in range(4):
        z = space.sample_point(rng)
        X = space.sample_tangent(z, rng)
        rep = potential_inequality_check(space, z, X)
        if rep.skipped:
            continue
        assert rep.fbar_residual <= 1e-6
        assert rep.worst >= -1e-6


def test_commutation_check(space, rng):
    z, zp = space.sample_points(rng, 2)
    X = space.sample_tangent(z, rng)
    Y = space.sample_tangent(zp, rng)
    scale = max(1.0, abs(space.kernel(z, zp)))
    assert commutation_check(space, z, zp, X, Y) <= 1e-6 * scale
    assert commutation_check(space, z, zp, 0.0 * np.asarray(X), Y) == pytest.approx(0.0, abs=1e-12)
