import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nkgeom.errors import ClosureError, SpaceDefinitionError
from nkgeom.liealg import (LieAlgebraData, ReductiveSpace, ad_invariance_residual,
                           antisymmetry_residual, coordinates_in, dump_space_definition,
                           gram_from_matrices, jacobi_residual, load_space_definition,
                           structure_from_matrices)
from nkgeom.modelspaces import build_berger_sphere, su2_matrices


def so3():
    c = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        c[i, j, k], c[j, i, k] = 1.0, -1.0
    return c


def test_so3_is_valid_and_bi_invariant():
    alg = LieAlgebraData(so3(), np.eye(3))
    assert jacobi_residual(alg.structure) == 0.0
    np.testing.assert_array_equal(alg.bracket(np.eye(3)[0], np.eye(3)[1]), np.eye(3)[2])
    assert all(v < 1e-15 for v in alg.residuals().values())


@pytest.mark.parametrize("mutate, message", [
    (lambda c, g: (c[:2], g), "n x n x n"),
    (lambda c, g: (c + _bump(c), g), "antisymm"),
    (lambda c, g: (c, g + np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]])), "symmetric"),
    (lambda c, g: (c, -np.eye(3)), "positive"),
    (lambda c, g: (c, np.diag([1.0, 2.0, 3.0])), "invarian"),
])
def test_invalid_definitions_name_the_violation(mutate, message):
    c, g = mutate(so3(), np.eye(3))
    with pytest.raises(SpaceDefinitionError, match=message):
        LieAlgebraData(c, g)


def _bump(c):
    out = np.zeros_like(c)
    out[0, 0, 1] = 0.5
    return out


def test_jacobi_failure_detected():
    c = np.zeros((3, 3, 3))
    # [e1,e2]=e3, [e2,e3]=e2, others zero: antisymmetric but violates Jacobi
    c[0, 1, 2], c[1, 0, 2] = 1.0, -1.0
    c[1, 2, 1], c[2, 1, 1] = 1.0, -1.0
    c[0, 2, 0], c[2, 0, 0] = 1.0, -1.0
    assert antisymmetry_residual(c) == 0.0
    assert jacobi_residual(c) > 0.1
    with pytest.raises(SpaceDefinitionError, match="Jacobi"):
        LieAlgebraData(c, np.eye(3), bi_invariant=False)


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_structure_from_matrices_matches_commutators(coeffs):
    mats = su2_matrices()
    c = structure_from_matrices(mats)
    x, y = np.array(coeffs[:3]), np.array(coeffs[3:])
    mx = sum(a * m for a, m in zip(x, mats))
    my = sum(a * m for a, m in zip(y, mats))
    expected = coordinates_in(mats, mx @ my - my @ mx)
    np.testing.assert_allclose(np.einsum("i,j,ijk->k", x, y, c), expected, atol=1e-12)


def test_coordinates_outside_span_raise():
    with pytest.raises(ClosureError):
        coordinates_in(su2_matrices(), np.eye(2, dtype=complex))


def test_trace_form_is_ad_invariant():
    mats = su2_matrices()
    g = gram_from_matrices(mats, lambda a, b: -np.real(np.trace(a @ b)))
    assert ad_invariance_residual(structure_from_matrices(mats), g) < 1e-14


def test_reductive_space_rejects_non_invariant_complement():
    alg = LieAlgebraData(so3(), np.eye(3))
    eye = np.eye(3)
    with pytest.raises(SpaceDefinitionError):
        # k = span{e3} but p tilted towards k: [k, p] leaves p
        ReductiveSpace(alg, eye[:, [2]], np.column_stack([eye[:, 0] + eye[:, 2], eye[:, 1]]))


def test_naturally_reductive_flags(bundles):
    for b in bundles.values():
        ok, res = b.space.is_naturally_reductive()
        assert ok and res < 1e-12
    ok, res = build_berger_sphere(1.5, 0.3).space.is_naturally_reductive()
    assert not ok and res > 0.1


def test_weighted_metric_has_nonzero_u_tensor(s3s3):
    sp = s3s3.space
    w = ReductiveSpace(sp.algebra, sp.k_basis, sp.p_basis, p_metric=np.diag([1, 1, 1, 2, 2, 2.0]))
    assert np.abs(w.u_tensor_array).max() > 0.1
    assert not w.is_naturally_reductive()[0]
    # U is symmetric in its two inputs
    np.testing.assert_allclose(w.u_tensor_array, np.transpose(w.u_tensor_array, (1, 0, 2)),
                               atol=1e-14)


@pytest.mark.parametrize("name", ["cp3", "flag", "s3s3"])
def test_definition_round_trip(bundles, name):
    doc = bundles[name].to_definition()
    text = dump_space_definition(doc)
    space = load_space_definition(json.loads(text))
    again = space.to_definition({"theta": doc["theta"]})
    assert dump_space_definition(again) == text


def test_definition_round_trip_non_bi_invariant(tmp_path):
    doc = build_berger_sphere(2.0, 0.5).to_definition()
    path = tmp_path / "berger.json"
    path.write_text(dump_space_definition(doc))
    assert dump_space_definition(load_space_definition(path).to_definition()) == \
        dump_space_definition(doc)


def test_loader_accepts_k_basis(cp3):
    doc = cp3.to_definition()
    kb = np.eye(doc["dim"])[:, doc["k_indices"]].T.tolist()
    doc2 = {k: v for k, v in doc.items() if k != "k_indices"}
    doc2["k_basis"] = kb
    space = load_space_definition(doc2)
    assert space.dim_p == 6 and space.is_naturally_reductive()[0]


@pytest.mark.parametrize("patch, message", [
    ({"dim": -1}, "dim"),
    ({"structure": "x"}, "non-numeric"),
    ({"k_indices": [0, 0]}, "k_indices"),
])
def test_loader_errors(cp3, patch, message):
    doc = dict(cp3.to_definition())
    doc.update(patch)
    with pytest.raises(SpaceDefinitionError, match=message):
        load_space_definition(doc)


def test_loader_missing_fields(tmp_path):
    with pytest.raises(SpaceDefinitionError, match="missing"):
        load_space_definition({"dim": 3})
    with pytest.raises(SpaceDefinitionError, match="k_indices"):
        load_space_definition({"dim": 3, "structure": so3().tolist(), "metric": np.eye(3).tolist()})
    with pytest.raises(SpaceDefinitionError, match="cannot read"):
        load_space_definition(tmp_path / "missing.json")


def test_generated_subalgebra_of_catalog(cp3, s3s3):
    # the Lagrangian RP^3 is D-invariant: [v,v] + v is a canonically embedded subalgebra
    s = cp3.space.generated_canonical_subalgebra(cp3.candidate("rp3").subspace)
    assert s.is_subalgebra and s.splits and s.canonically_embedded
    # a great 2-sphere in the S^3 fiber is not: its bracket leaves the plane
    g = s3s3.space.generated_canonical_subalgebra(s3s3.candidate("great_sphere").subspace)
    assert not (g.is_subalgebra and g.splits)


def test_bracket_helpers_consistent(flag):
    sp = flag.space
    x, y = np.eye(6)[0], np.eye(6)[2]
    full = sp.bracket(sp.p_to_adapted(x), sp.p_to_adapted(y))
    np.testing.assert_allclose(sp.project_p(full)[:6], sp.bracket_p(x, y), atol=1e-14)
    np.testing.assert_allclose(sp.project_k(full)[6:], sp.bracket_k(x, y), atol=1e-14)
    np.testing.assert_allclose(sp.project_p(full) + sp.project_k(full), full)
