import numpy as np
import pytest
from hypothesis import given, strategies as st

from nkgeom.errors import NotThreeSymmetricError
from nkgeom.nkstruct import (HOLOMORPHIC, LAGRANGIAN, MIXED, TOTALLY_REAL, build_J,
                             classify_J_type, kahler_angle, nabla_J, nearly_kahler_residual)
from nkgeom.numkernel import Subspace, orthonormalize, random_subspace

SPACES = ["cp3", "flag", "s3s3"]


@pytest.mark.parametrize("name, strict", [("cp3", 1 / np.sqrt(2)), ("flag", 1 / np.sqrt(2)),
                                          ("s3s3", 1 / np.sqrt(3))])
def test_nearly_kahler_and_strictness(bundles, name, strict):
    b = bundles[name]
    res = nearly_kahler_residual(b.curv, b.nk)
    assert res.residual < 1e-12
    assert res.antisymmetry < 1e-12
    assert res.strictness == pytest.approx(strict, abs=1e-12)


@pytest.mark.parametrize("name", SPACES)
def test_J_is_orthogonal_complex_structure(bundles, name):
    j = bundles[name].nk.J
    np.testing.assert_allclose(j @ j, -np.eye(6), atol=1e-13)
    np.testing.assert_allclose(j.T @ j, np.eye(6), atol=1e-13)


@given(st.sampled_from(SPACES), st.integers(0, 10_000))
def test_nabla_J_norm_is_constant_on_unit_orthogonal_pairs(bundles, name, seed):
    # strict nearly Kähler in dimension 6: |(nabla_X J)Y|^2 = c (|X|^2|Y|^2 - <X,Y>^2 - <JX,Y>^2)
    b = bundles[name]
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 6))
    t = nabla_J(b.curv, b.nk)
    val = np.einsum("x,y,xyo->o", x, y, t)
    c = nearly_kahler_residual(b.curv, b.nk).strictness ** 2
    form = x @ x * (y @ y) - (x @ y) ** 2 - (b.nk.J @ x @ y) ** 2
    assert val @ val == pytest.approx(c * form, abs=1e-10)


def _wrong_theta(bundle):
    j = bundle.nk.J
    pv = bundle.space.fibration[0].projector
    jp = j @ pv - j @ (np.eye(6) - pv)
    return (np.sqrt(3) * jp - np.eye(6)) / 2


@pytest.mark.parametrize("name", ["cp3", "flag"])
def test_wrong_theta_is_not_nearly_kahler(bundles, name):
    b = bundles[name]
    nk = build_J(b.space, _wrong_theta(b))
    res = nearly_kahler_residual(b.curv, nk)
    assert res.residual > 0.1
    assert res.residual == pytest.approx(np.sqrt(0.5), abs=1e-9)


def test_wrong_theta_on_s3s3_is_rejected(s3s3):
    # the fiber is not J-invariant here, so flipping J on it is not a complex structure
    with pytest.raises(NotThreeSymmetricError):
        build_J(s3s3.space, _wrong_theta(s3s3))


def test_build_J_rejections(cp3):
    sp = cp3.space
    with pytest.raises(NotThreeSymmetricError, match="6 x 6"):
        build_J(sp, np.eye(5))
    with pytest.raises(NotThreeSymmetricError, match="orthogonal"):
        build_J(sp, 2 * np.eye(6))
    with pytest.raises(NotThreeSymmetricError, match="theta\\^3"):
        build_J(sp, -np.eye(6))
    with pytest.raises(NotThreeSymmetricError, match="fixes"):
        build_J(sp, np.eye(6))
    # a rotation by 2pi/3 in coordinate pairs that ignores the isotropy action
    c, s = -0.5, np.sqrt(3) / 2
    rot = np.array([[c, -s], [s, c]])
    perm = np.eye(6)[[0, 2, 1, 3, 4, 5]]
    theta = perm @ np.kron(np.eye(3), rot) @ perm.T
    with pytest.raises(NotThreeSymmetricError, match="isotropy"):
        build_J(sp, theta)


# --- Kähler angle and types -------------------------------------------------

@pytest.mark.parametrize("name", SPACES)
def test_catalog_j_types_and_angles(bundles, name):
    b = bundles[name]
    for c in b.candidates:
        assert classify_J_type(c.subspace, b.nk) == c.j_type, c.label
        ka = kahler_angle(c.subspace, b.nk)
        assert ka.constant
        expected = 0.0 if c.j_type == HOLOMORPHIC else np.pi / 2
        assert ka.angle == pytest.approx(expected, abs=1e-12)


@given(st.sampled_from(SPACES), st.integers(0, 10_000))
def test_kahler_angle_of_planes(bundles, name, seed):
    # every 2-plane has constant Kähler angle arccos |<J u1, u2>|
    j = bundles[name].nk.J
    v = random_subspace(np.random.default_rng(seed), 6, 2)
    u1, u2 = v.basis.T
    ka = kahler_angle(v, bundles[name].nk)
    assert ka.constant
    assert ka.angle == pytest.approx(np.arccos(min(1.0, abs(j @ u1 @ u2))), abs=1e-9)
    assert ka.min_angle == pytest.approx(ka.angle, abs=1e-6)


@pytest.mark.parametrize("phi", [0.0, 0.3, 1.0, np.pi / 2])
def test_kahler_angle_prescribed(cp3, phi):
    j = cp3.nk.J
    x = np.eye(6)[0]
    y = np.eye(6)[2] if abs(j @ x @ np.eye(6)[2]) < 1e-12 else np.eye(6)[4]
    v = orthonormalize([x, np.cos(phi) * (j @ x) + np.sin(phi) * y])
    assert kahler_angle(v, cp3.nk).angle == pytest.approx(phi, abs=1e-12)


def test_mixed_and_totally_real_types(cp3):
    j = cp3.nk.J
    x = np.eye(6)[0]
    mixed = orthonormalize([x, np.cos(0.4) * (j @ x) + np.sin(0.4) * np.eye(6)[2]])
    assert classify_J_type(mixed, cp3.nk) == MIXED
    assert classify_J_type(Subspace.coordinate(6, [0, 2]), cp3.nk) == TOTALLY_REAL
    assert classify_J_type(cp3.candidate("rp3").subspace, cp3.nk) == LAGRANGIAN


def test_nonconstant_kahler_angle(cp3):
    j = cp3.nk.J
    x = np.eye(6)[0]
    v = orthonormalize([x, j @ x, np.eye(6)[2]])
    ka = kahler_angle(v, cp3.nk)
    assert not ka.constant and ka.angle is None
    assert ka.min_angle == pytest.approx(0.0, abs=1e-7)
    assert ka.max_angle == pytest.approx(np.pi / 2, abs=1e-7)
