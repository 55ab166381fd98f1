import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from nkgeom.errors import DimensionError, EmptySpanError, SymmetryError
from nkgeom.numkernel import (Subspace, Tolerance, intersection, mat_exp, orthonormalize,
                              projector_distance, random_frames, random_subspace, span_columns,
                              subspace_contains, subspace_equal, subspace_sum, sym_eig)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_tolerance_validation():
    Tolerance(1e-10, 1e-8)
    with pytest.raises(ValueError):
        Tolerance(1e-6, 1e-8)
    with pytest.raises(ValueError):
        Tolerance(0.0, 1e-8)


def test_subspace_is_read_only_and_projector():
    v = Subspace.coordinate(4, [0, 2])
    assert v.dim == 2 and v.ambient_dim == 4
    np.testing.assert_array_equal(v.projector, np.diag([1.0, 0, 1, 0]))
    with pytest.raises(ValueError):
        v.basis[0, 0] = 3.0


def test_subspace_rejects_bad_shape():
    with pytest.raises(DimensionError):
        Subspace(np.ones(3))
    with pytest.raises(DimensionError):
        Subspace(np.ones((2, 3)))


def test_orthonormalize_drops_dependent_vectors():
    v = orthonormalize([np.array([1.0, 1, 0]), np.array([2.0, 2, 0]), np.array([0, 0, 3.0])])
    assert v.dim == 2
    np.testing.assert_allclose(v.basis.T @ v.basis, np.eye(2), atol=1e-14)


def test_orthonormalize_empty_span():
    with pytest.raises(EmptySpanError):
        orthonormalize([np.zeros(3)])
    assert orthonormalize([np.zeros(3)], allow_empty=True).dim == 0


def test_orthonormalize_dimension_mismatch():
    with pytest.raises(DimensionError):
        orthonormalize([np.ones(3), np.ones(4)])


@given(arrays(float, (6, 3), elements=finite))
def test_orthonormalize_spans_input(mat):
    if np.linalg.matrix_rank(mat, tol=1e-6) < 3 or np.linalg.cond(mat) > 1e6:
        return
    v = orthonormalize(list(mat.T))
    assert v.dim == 3
    assert v.check() < 1e-12
    np.testing.assert_allclose(v.projector @ mat, mat, atol=1e-9 * max(1.0, np.abs(mat).max()))


@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(1, 5))
def test_sum_and_intersection_dimensions(seed, da, db):
    rng = np.random.default_rng(seed)
    n = 6
    common = rng.standard_normal((n, 1))
    a = orthonormalize(list(np.hstack([common, rng.standard_normal((n, da - 1))]).T))
    b = orthonormalize(list(np.hstack([common, rng.standard_normal((n, db - 1))]).T))
    s = subspace_sum(a, b)
    i = intersection(a, b)
    assert s.dim + i.dim == a.dim + b.dim
    assert subspace_contains(i, a) and subspace_contains(i, b)
    assert subspace_contains(a, s) and subspace_contains(b, s)


def test_complement_and_equality():
    v = Subspace.coordinate(5, [1, 3])
    c = v.complement()
    assert c.dim == 3
    assert subspace_equal(subspace_sum(v, c), Subspace.full(5))
    assert intersection(v, c).dim == 0
    rot = Subspace(v.basis @ np.array([[0.6, -0.8], [0.8, 0.6]]))
    assert subspace_equal(v, rot)
    assert projector_distance(v, rot) < 1e-15


def test_span_columns_rank():
    m = np.array([[1.0, 2, 0], [1, 2, 0], [0, 0, 1e-14]])
    assert span_columns(m).dim == 1


def test_sym_eig_clusters_and_rejects_asymmetric():
    es = sym_eig(np.diag([1.0, 2.0, 1.0 + 1e-9, 3.0]))
    assert [x.value for x in es] == pytest.approx([1.0, 2.0, 3.0])
    assert [x.space.dim for x in es] == [2, 1, 1]
    with pytest.raises(SymmetryError):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(st.integers(0, 10_000))
def test_sym_eig_reconstructs(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((5, 5))
    a = a + a.T
    rebuilt = sum(x.value * x.space.projector for x in sym_eig(a))
    np.testing.assert_allclose(rebuilt, a, atol=1e-9)


def test_mat_exp_zero_is_identity_exactly():
    assert np.array_equal(mat_exp(np.zeros((4, 4))), np.eye(4))


@given(st.integers(0, 10_000))
def test_mat_exp_of_skew_is_rotation(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((4, 4))
    a = a - a.T
    g = mat_exp(a)
    np.testing.assert_allclose(g.T @ g, np.eye(4), atol=1e-12)
    # oracle: eigendecomposition of the normal matrix a
    w, u = np.linalg.eig(a)
    np.testing.assert_allclose((u @ np.diag(np.exp(w)) @ np.linalg.inv(u)).real, g, atol=1e-10)


def test_random_frames_orthonormal_and_seeded():
    f1 = random_frames(np.random.default_rng(3), 50, 6, 3)
    f2 = random_frames(np.random.default_rng(3), 50, 6, 3)
    assert np.array_equal(f1, f2)
    gram = np.transpose(f1, (0, 2, 1)) @ f1
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-13)
    v = random_subspace(np.random.default_rng(0), 6, 2)
    assert v.dim == 2 and v.check() < 1e-13
