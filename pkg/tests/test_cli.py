import json
import subprocess
import sys

import numpy as np
import pytest

from nkgeom.cli import main, parse_vector, resolve_space
from nkgeom.errors import InputError, UnknownSpaceError
from nkgeom.modelspaces import build
from nkgeom.numkernel import DEFAULT_TOL


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- parsing ------------------------------------------------------------------

def test_parse_vector_expressions():
    np.testing.assert_allclose(parse_vector("e1 + sqrt3*e4", 6), [1, 0, 0, np.sqrt(3), 0, 0])
    np.testing.assert_allclose(parse_vector("0.5*e2 - sqrt(2)*e3", 4), [0, 0.5, -np.sqrt(2), 0])
    np.testing.assert_allclose(parse_vector("1,2,3", 3), [1, 2, 3])
    np.testing.assert_allclose(parse_vector("pi*e1", 2), [np.pi, 0])


@pytest.mark.parametrize("bad", ["e7", "__import__('os')", "e1 +", "1,2", "3", "foo(e1)",
                                 "e1.real"])
def test_parse_vector_rejects(bad):
    with pytest.raises(InputError):
        parse_vector(bad, 6)


def test_resolve_space_variants(tmp_path):
    assert resolve_space("sphere:3:2", 1, DEFAULT_TOL).space.dim_p == 3
    assert resolve_space("berger:2:0.5", 1, DEFAULT_TOL).space.dim_p == 3
    with pytest.raises(UnknownSpaceError):
        resolve_space("g2", 1, DEFAULT_TOL)
    with pytest.raises(InputError):
        resolve_space("sphere:x:1", 1, DEFAULT_TOL)
    with pytest.raises(InputError):
        resolve_space(str(tmp_path / "missing.json"), 1, DEFAULT_TOL)


# --- subcommands --------------------------------------------------------------

def test_verify_tables_json(capsys, tmp_path):
    out_file = tmp_path / "out.json"
    code, out, _ = run(capsys, "verify-tables", "--space", "cp3", "--json", str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert doc["schema"] == 1
    assert len(doc["reports"][0]["rows"]) == 4
    assert out.count("PASS") == 4


def test_spectra_s3s3(capsys):
    code, out, _ = run(capsys, "spectra", "--space", "s3s3", "--direction", "e1", "--order", "1")
    assert code == 0
    lines = out.splitlines()
    assert "0 (0)  multiplicity 2" in lines[1]
    assert "(1/12)  multiplicity 2" in lines[2]
    assert "(3/4)  multiplicity 2" in lines[3]


def test_search_empty_dimension(capsys):
    code, out, _ = run(capsys, "search", "--space", "cp3", "--dim", "4", "--samples", "2000",
                       "--seed", "7")
    assert code == 0
    assert out.startswith("0 totally geodesic subspaces found; min residual ")


def test_search_determinism_across_threads(tmp_path, capsys):
    files = []
    for t in ("1", "4"):
        f = tmp_path / f"s{t}.json"
        assert run(capsys, "--threads", t, "search", "--space", "flag", "--dim", "3",
                   "--samples", "9000", "--seed", "3", "--json", str(f))[0] == 0
        files.append(f.read_bytes())
    assert files[0] == files[1]


def test_check_subspace_verdicts_and_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "check-subspace", "--space", "cp3", "--inline", "e1;e3;e5",
                       "--expect", "tg")
    assert code == 0 and "dimension 3: totally geodesic" in out and "lagrangian" in out
    code, _, err = run(capsys, "check-subspace", "--space", "cp3", "--inline", "e1;e3",
                       "--expect", "tg")
    assert code == 1 and "mismatch" in err
    f = tmp_path / "v.txt"
    f.write_text("# lambda3 sphere\nsqrt2*e1 + sqrt3*e3\nsqrt2*e2 + sqrt3*e4\n")
    code, out, _ = run(capsys, "check-subspace", "--space", "cp3", "--vectors", str(f))
    assert code == 0 and "(1/5)" in out


@pytest.mark.parametrize("argv", [
    ["check-subspace", "--space", "cp3", "--inline", "e9"],
    ["check-subspace", "--space", "nowhere", "--inline", "e1"],
    ["check-subspace", "--space", "cp3"],
    ["--order", "-1", "spectra", "--space", "cp3", "--direction", "e1"],
    ["geodesic", "--space", "sphere:3:1", "--a", "1", "--v", "e1"],
    ["geodesic", "--space", "sphere:3:1", "--cone", "--a", "0", "--v", "0*e1"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_global_flags_after_subcommand(capsys):
    code, out, _ = run(capsys, "check-subspace", "--space", "flag", "--inline", "e1+e3;e5",
                       "--order", "2", "--tol", "1e-10")
    assert code == 0 and "totally geodesic" in out


def test_space_definition_file(capsys, tmp_path):
    b = build("cp3")
    doc = b.to_definition()
    doc["theta"] = b.nk.theta.tolist()
    f = tmp_path / "cp3.json"
    f.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check-subspace", "--space", str(f), "--inline", "e3;e4",
                       "--expect", "tg")
    assert code == 0 and "holomorphic" in out


def test_cone_command(capsys, tmp_path):
    f = tmp_path / "cone.json"
    code, out, _ = run(capsys, "cone", "--space", "cp3", "--json", str(f))
    assert code == 0 and out.count("totally geodesic") == 4
    assert len(json.loads(f.read_text())["cone_subspaces"]) == 4
    code, out, _ = run(capsys, "cone", "--space", "sphere:3:1", "--scan", "--points", "50")
    assert code == 0 and "give totally geodesic hyperplanes" in out


def test_geodesic_command(capsys):
    code, out, _ = run(capsys, "geodesic", "--space", "cp3", "--cone", "--a", "0.5",
                       "--v", "e1", "--tau", "2")
    assert code == 0 and "maximal interval: (-inf, inf)" in out
    code, out, _ = run(capsys, "geodesic", "--space", "cp3", "--cone", "--a", "-1",
                       "--v", "0*e1", "--tau", "2")
    assert code == 0 and "maximal interval: (-inf, 2)" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nkgeom", "spectra", "--space", "cp3",
                           "--direction", "e1", "--order", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and "Jacobi operator" in proc.stdout
