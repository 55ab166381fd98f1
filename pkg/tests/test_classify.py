import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nkgeom import classify as cl
from nkgeom.modelspaces import build_berger_sphere, build_round_sphere
from nkgeom.numkernel import Subspace, random_frames, random_subspace

SPACES = ["cp3", "flag", "s3s3"]


# --- JSON helpers -------------------------------------------------------------

@pytest.mark.parametrize("x, tag", [(math.sqrt(5), "sqrt5"), (0.75, "3/4"), (math.pi / 2, "1/2*pi"),
                                    (-math.sqrt(2) / 4, "-1/4*sqrt2"), (0.0, "0"), (2.0, "2"),
                                    (2 / math.sqrt(3), "2/3*sqrt3")])
def test_symbolic_tags(x, tag):
    assert cl.symbolic_tag(x) == tag


def test_symbolic_tag_declines():
    assert cl.symbolic_tag(math.e) is None
    assert cl.symbolic_tag(float("nan")) is None
    assert cl.number(None) is None
    assert "symbolic" not in cl.number(math.e)


def test_round_sig_and_json_are_stable():
    assert cl.round_sig(1 / 3) == 0.333333333333333
    assert cl.to_json({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'


def test_default_threads(monkeypatch):
    monkeypatch.setenv(cl.THREADS_ENV, "3")
    assert cl.default_threads() == 3
    monkeypatch.setenv(cl.THREADS_ENV, "x")
    assert cl.default_threads() == 1


# --- fingerprints -------------------------------------------------------------

@pytest.mark.parametrize("name", SPACES)
def test_catalog_fingerprints_are_distinct(bundles, name):
    keys = cl.catalog_keys(bundles[name])
    assert len(keys) == len(bundles[name].candidates)


def test_fingerprint_of_lambda3_sphere(cp3):
    fp = cl.fingerprint(cp3, cp3.candidate("lambda3_sphere").subspace)
    assert fp.sec_spectrum == pytest.approx((0.2,))
    assert fp.kahler_type == "holomorphic" and fp.kahler_angle == pytest.approx(0.0)
    assert fp.berger_or_round == pytest.approx((math.sqrt(5), 1.0))
    assert fp.well_positioned is False
    doc = fp.to_json()
    assert doc["berger_or_round"]["r"]["symbolic"] == "sqrt5"


def test_fingerprint_of_berger(flag):
    fp = cl.fingerprint(flag, flag.candidate("berger").subspace)
    assert fp.berger_or_round == pytest.approx((math.sqrt(2), 0.25))
    assert fp.d_invariant and fp.kahler_type == "lagrangian"


@given(st.sampled_from(SPACES), st.integers(0, 10_000), st.integers(1, 5), st.integers(0, 10))
def test_fingerprint_isotropy_invariance(bundles, name, seed, d, which):
    b = bundles[name]
    v = random_subspace(np.random.default_rng(seed), 6, d)
    g = b.isotropy_sample[which % len(b.isotropy_sample)]
    a = cl.fingerprint(b, v, fibration=False)
    c = cl.fingerprint(b, Subspace(g @ v.basis), fibration=False)
    assert a.dim == c.dim and a.kahler_type == c.kahler_type and a.d_invariant == c.d_invariant
    np.testing.assert_allclose(a.sec_spectrum, c.sec_spectrum, atol=1e-9)
    assert (a.kahler_angle is None) == (c.kahler_angle is None)
    if a.kahler_angle is not None:
        assert a.kahler_angle == pytest.approx(c.kahler_angle, abs=1e-7)


@pytest.mark.parametrize("name", SPACES)
def test_catalog_fingerprints_survive_isotropy(bundles, name):
    b = bundles[name]
    keys = cl.catalog_keys(b)
    for c in b.candidates:
        for g in b.isotropy_sample:
            moved = Subspace(g @ c.subspace.basis)
            assert keys[cl.fingerprint(b, moved, fibration=False).class_key()] == c.label


# --- sweeps and search ------------------------------------------------------------

def test_random_sweep_is_clean_in_excluded_dimensions(cp3):
    stats, survivors = cl.random_sweep(cp3, 4, 500, seed=1)
    assert stats.clean and not survivors and stats.min_residual > 1e-3


def test_lazy_minimum_is_exact(s3s3):
    frames = random_frames(np.random.default_rng(3), 300, 6, 3)
    best, passing = cl._lazy_min_residual(s3s3.curv, frames, 1e-9)
    full = np.maximum(s3s3.curv.batch_residuals(frames, 0), s3s3.curv.batch_residuals(frames, 1))
    assert best == full.min() and not passing.any()


def test_random_sweep_does_not_depend_on_threads(flag):
    a = cl.random_sweep(flag, 5, 9000, seed=4, threads=1)[0]
    b = cl.random_sweep(flag, 5, 9000, seed=4, threads=3)[0]
    assert a == b


def test_structured_frames_are_orthonormal():
    frames = cl.structured_frames(6, 3, 200, seed=0)
    eye = np.eye(3)
    for f in frames[:50]:
        np.testing.assert_allclose(f.T @ f, eye, atol=1e-12)
    assert len(cl.structured_frames(6, 2, 0, seed=0)) > 1000


@pytest.mark.parametrize("name, d, labels", [
    ("cp3", 2, {"fiber", "su2_sphere", "lambda3_sphere"}),
    ("cp3", 3, {"rp3"}),
    ("cp3", 4, set()),
    ("flag", 3, {"real_flag", "berger"}),
    ("s3s3", 2, {"torus", "sphere_sqrt32", "great_sphere"}),
    ("s3s3", 3, {"berger", "fiber"}),
])
def test_search_finds_catalog_classes(bundles, name, d, labels):
    res = cl.search_tg_subspaces(bundles[name], d, 300, seed=7, structured_cap=2000)
    assert set(res.class_labels()) == labels
    assert not res.unmatched
    for members in res.classes.values():
        assert members[0].verdict.is_tg and members[0].order_verified == res.order


def test_search_rejects_bad_dimension(cp3):
    with pytest.raises(ValueError):
        cl.search_tg_subspaces(cp3, 7, 10)


def test_search_json_is_deterministic(s3s3):
    a = cl.search_tg_subspaces(s3s3, 2, 2000, seed=11, threads=1, structured_cap=500)
    b = cl.search_tg_subspaces(s3s3, 2, 2000, seed=11, threads=2, structured_cap=500)
    assert cl.to_json(a.to_json()) == cl.to_json(b.to_json())
    doc = json.loads(cl.to_json(a.to_json()))
    assert doc["schema"] == 1 and doc["unmatched_classes"] == 0


# --- maximality -------------------------------------------------------------------

@pytest.mark.parametrize("name, nonmax", [("cp3", set()), ("flag", {"rp2"}),
                                          ("s3s3", {"great_sphere"})])
def test_maximality(bundles, name, nonmax):
    b = bundles[name]
    results = [cl.search_tg_subspaces(b, d, 200, seed=7, structured_cap=1000) for d in (2, 3)]
    rep = cl.maximality_analysis(results, b)
    assert {c["label"] for c in rep.classes if not c["maximal"]} == nonmax
    assert rep.angle_rule_holds
    assert rep.to_json()["maximal_dim2_holomorphic_dim3_lagrangian"]


# --- tables -----------------------------------------------------------------------

def test_verify_tables_pass():
    for rep in cl.verify_tables():
        assert rep.passes, rep.space
        assert len(rep.rows) == {"cp3": 4, "flag": 6, "s3s3": 5}[rep.space]


def test_verify_row_reports_mismatch(cp3):
    from dataclasses import replace
    wrong = replace(cp3.candidate("fiber"), sec=1.0, j_type="lagrangian")
    row = cl.verify_row(cp3, wrong)
    assert not row.passes
    bad = {k for k, (_, _, ok) in row.checks.items() if not ok}
    assert bad == {"sectional_curvature", "j_type"}
    assert row.to_json()["checks"]["sectional_curvature"]["ok"] is False


def test_verify_tables_with_sweeps():
    rep = cl.verify_tables(["s3s3"], sweep_samples=300)[0]
    assert rep.passes and [s.dim for s in rep.sweeps] == [4, 5]


# --- cones ------------------------------------------------------------------------

def test_cone_report_cp3_lists_maximal_cones(cp3):
    rep = cl.cone_report(cp3, scan=False)
    assert len(rep.subspaces) == 4
    assert all(s["totally_geodesic"] for s in rep.subspaces)
    labels = {s["label"]: s["calibration"] for s in rep.subspaces}
    assert labels["rp3"] == "coassociative (dimension rule)"
    assert labels["fiber"] == "associative (dimension rule)"


def test_cone_report_skips_non_maximal(flag):
    rep = cl.cone_report(flag, scan=False)
    assert "rp2" not in {s["label"] for s in rep.subspaces} and len(rep.subspaces) == 5


def test_cone_report_round_and_berger_scans():
    round_rep = cl.cone_report(build_round_sphere(3, 1.0), scan=True, points_per_sphere=100)
    assert round_rep.scan.families_found
    berger = cl.cone_report(build_berger_sphere(2.0, 0.5), scan=True, points_per_sphere=100)
    assert not berger.scan.families_found and berger.scan.min_residual > 0.5
    doc = berger.to_json()
    assert doc["hypersurface_scan"]["families_found"] is False
    assert "not scanned" in doc["hypersurface_scan"]["scope"]
