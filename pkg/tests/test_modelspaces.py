import numpy as np
import pytest
from hypothesis import given, strategies as st

from nkgeom.errors import NotBergerError, SpaceDefinitionError, UnknownSpaceError
from nkgeom.liealg import coordinates_in, structure_from_matrices
from nkgeom.modelspaces import (NK_SPACES, BergerParams, berger_params_from_subspace, build,
                                build_berger_sphere, build_round_sphere, candidate_catalog,
                                isotropy_orbit_normalize, lambda3_matrices, su2_matrices,
                                verify_torus_lattice)
from nkgeom.numkernel import Subspace, orthonormalize, random_subspace


def test_unknown_space():
    with pytest.raises(UnknownSpaceError):
        build("g2")


def test_catalog_sizes():
    assert [len(candidate_catalog(n)) for n in NK_SPACES] == [4, 6, 5]


@pytest.mark.parametrize("name", NK_SPACES)
def test_models_are_naturally_reductive(bundles, name):
    ok, res = bundles[name].space.is_naturally_reductive()
    assert ok and res < 1e-13


@pytest.mark.parametrize("name", NK_SPACES)
def test_isotropy_and_congruences_preserve_curvature(bundles, name):
    b = bundles[name]
    r = b.curv.R
    for g in b.isotropy_sample + b.congruences:
        np.testing.assert_allclose(g.T @ g, np.eye(6), atol=1e-12)
        moved = np.einsum("xyzo,xa,yb,zc,od->abcd", r, g, g, g, g)
        np.testing.assert_allclose(moved, r, atol=1e-12)


@pytest.mark.parametrize("name", NK_SPACES)
def test_isotropy_commutes_with_J(bundles, name):
    b = bundles[name]
    for g in b.isotropy_sample[:5]:
        np.testing.assert_allclose(g @ b.nk.J, b.nk.J @ g, atol=1e-12)


@pytest.mark.parametrize("name", NK_SPACES)
def test_catalog_sectional_values(bundles, name):
    b = bundles[name]
    for c in b.candidates:
        if c.sec is not None:
            q = b.curv.curvature_operator(c.subspace)
            np.testing.assert_allclose(np.linalg.eigvalsh(q), c.sec, atol=1e-12)


@pytest.mark.parametrize("name", NK_SPACES)
def test_catalog_berger_params(bundles, name):
    b = bundles[name]
    for c in b.candidates:
        if c.berger is not None:
            p = berger_params_from_subspace(c.subspace, b.curv)
            assert (p.r, p.tau) == pytest.approx(c.berger, abs=1e-12)
            assert not p.round


def test_lambda3_matrices_form_su2_and_span_the_sphere(cp3):
    c_l = structure_from_matrices(lambda3_matrices())
    c_s = structure_from_matrices(su2_matrices())
    np.testing.assert_allclose(c_l, c_s, atol=1e-13)
    allm = cp3.matrices + cp3.k_matrices
    proj = [coordinates_in(allm, m)[:6] for m in lambda3_matrices()]
    span = orthonormalize([p for p in proj if np.linalg.norm(p) > 1e-9])
    assert np.allclose(span.projector, cp3.candidate("lambda3_sphere").subspace.projector)


# --- lattices ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["flag", "s3s3"])
def test_torus_lattices(bundles, name):
    gens = bundles[name].candidate("torus").lattice
    assert verify_torus_lattice(name, gens)
    assert not verify_torus_lattice(name, [(u / 2, v / 2) for u, v in gens])


def test_torus_lattice_unsupported():
    with pytest.raises(UnknownSpaceError):
        verify_torus_lattice("cp3", [(1.0, 0.0)])


# --- spheres ----------------------------------------------------------------

def test_sphere_rejects_bad_parameters():
    with pytest.raises(SpaceDefinitionError):
        build_round_sphere(1, 1.0)
    with pytest.raises(SpaceDefinitionError):
        build_berger_sphere(1.0, 0.0)


@given(st.floats(0.3, 3.0), st.floats(0.05, 3.0))
def test_berger_params_round_trip(r, tau):
    b = build_berger_sphere(round(r, 3), round(tau, 3), k_max=1)
    r, tau = round(r, 3), round(tau, 3)
    p = berger_params_from_subspace(Subspace.full(3), b.curv)
    if abs(tau - 1) < 1e-9:
        assert p.round and p.r == pytest.approx(r, rel=1e-9)
        return
    assert not p.round
    assert (p.r, p.tau) == pytest.approx((r, tau), rel=1e-9)
    assert p.sec_values == pytest.approx((tau / r ** 2, (4 - 3 * tau) / r ** 2), rel=1e-9)
    assert abs(abs(p.axis[0]) - 1) < 1e-9


def test_berger_is_not_naturally_reductive():
    assert not build_berger_sphere(1.5, 0.3, k_max=1).space.is_naturally_reductive()[0]


def test_berger_params_errors(cp3):
    with pytest.raises(NotBergerError):
        berger_params_from_subspace(cp3.candidate("fiber").subspace, cp3.curv)
    with pytest.raises(NotBergerError):
        berger_params_from_subspace(random_subspace(np.random.default_rng(0), 6, 3), cp3.curv)


def test_berger_sec_values():
    assert BergerParams(2.0, 0.5, False).sec_values == (0.125, 0.625)


# --- normalization ----------------------------------------------------------

@pytest.mark.parametrize("name, label", [("cp3", "rp3"), ("flag", "sphere_sqrt2"),
                                         ("s3s3", "torus")])
def test_normalize_keeps_isotropy_class(bundles, name, label):
    b = bundles[name]
    v = b.candidate(label).subspace
    g = b.isotropy_sample[3]
    moved = Subspace(g @ v.basis)
    w = isotropy_orbit_normalize(moved, b, budget=5)
    assert w.dim == v.dim
    assert b.curv.tg_check(w).is_tg
    q0 = np.linalg.eigvalsh(b.curv.curvature_operator(v))
    np.testing.assert_allclose(np.linalg.eigvalsh(b.curv.curvature_operator(w)), q0, atol=1e-9)
