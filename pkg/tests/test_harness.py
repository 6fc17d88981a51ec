import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftkrylov import experiments
from shiftkrylov.cli import main, read_ritz_csv
from shiftkrylov.errors import InvalidInputError
from shiftkrylov.harness import ExperimentSpec, build_operator, parse_shifts, run_spec
from shiftkrylov.operators import bidiagonal_operator, write_matrix_market
from shiftkrylov.shifted import ConvergenceReport


def read_report(path):
    with open(path) as fh:
        return ConvergenceReport.from_csv(fh)


# ---- spec parsing -------------------------------------------------------------------------

def test_spec_round_trip():
    spec = ExperimentSpec(matrix="builtin:bidiag:200", shifts=[0.0, -0.4, 1 - 2j], m=20, k=5,
                          rtol=1e-9, nrhs=3, rhs_kind="related:1e-4", seed=7, out="x.csv")
    back = ExperimentSpec.from_text(spec.to_text())
    assert back == spec


@settings(max_examples=30, deadline=None)
@given(shifts=st.lists(st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 6)), min_size=1, max_size=5),
       m=st.integers(2, 60), seed=st.integers(0, 2**31 - 1), rtol=st.floats(1e-14, 1e-1))
def test_spec_round_trip_property(shifts, m, seed, rtol):
    spec = ExperimentSpec(shifts=shifts, m=m, k=m // 2, seed=seed, rtol=rtol)
    assert ExperimentSpec.from_text(spec.to_text()) == spec


def test_spec_overrides_and_comments():
    text = "# comment\nm = 30\nshifts = 0, -1\nk=4  # inline\n"
    spec = ExperimentSpec.from_text(text, m="40", seed=None)
    assert spec.m == 40 and spec.k == 4 and spec.shifts == [0.0, -1.0]


@pytest.mark.parametrize("text", ["m 30\n", "color = red\n", "m = many\n", "shifts = 1,x\n"])
def test_spec_parse_errors(text):
    with pytest.raises(InvalidInputError):
        ExperimentSpec.from_text(text)


def test_spec_validation():
    with pytest.raises(InvalidInputError, match="empty"):
        ExperimentSpec(shifts=[]).validate()
    with pytest.raises(InvalidInputError):
        ExperimentSpec(m=10, k=10).validate()
    with pytest.raises(InvalidInputError):
        ExperimentSpec(rhs_kind="related:abc").validate()
    with pytest.raises(InvalidInputError, match="does not exist"):
        ExperimentSpec(matrix="mm:/nonexistent.mtx").validate()
    with pytest.raises(InvalidInputError):
        ExperimentSpec(nrhs=2, k=0).validate()


def test_parse_shifts_complex():
    assert parse_shifts("0, -0.4, 1+2i") == [0.0, -0.4, 1 + 2j]


def test_build_operator_sources(tmp_path):
    assert build_operator("builtin:bidiag:50").n == 50
    p = tmp_path / "m.mtx"
    write_matrix_market(p, np.diag([1.0, 2.0, 3.0]))
    assert build_operator(f"mm:{p}").n == 3
    with pytest.raises(InvalidInputError):
        build_operator("builtin:nope:3")


# ---- running specs ------------------------------------------------------------------------

def test_run_spec_single_rhs_deterministic():
    spec = ExperimentSpec(matrix="builtin:bidiag:300", m=20, k=5, rtol=1e-8)
    r1, ok1 = run_spec(spec)
    r2, ok2 = run_spec(spec)
    assert ok1 and ok2
    assert r1.to_csv() == r2.to_csv()


def test_run_spec_multi_rhs_parallel_matches_serial():
    base = dict(matrix="builtin:bidiag:300", m=20, k=5, rtol=1e-7, nrhs=3, shifts=[0.0, -2.0])
    serial, ok_s = run_spec(ExperimentSpec(**base))
    par, ok_p = run_spec(ExperimentSpec(parallel_rhs=True, **base))
    assert ok_s and ok_p
    assert sorted(serial.rows) == sorted(par.rows)


def test_run_spec_budget_flagged():
    _, ok = run_spec(ExperimentSpec(matrix="builtin:bidiag:500", m=10, k=0, rtol=1e-12, max_mv=50))
    assert not ok


# ---- CLI ----------------------------------------------------------------------------------

def test_cli_solve_writes_report(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["solve", "--matrix", "builtin:bidiag:200", "--shifts", "0,-0.4,-2", "--m", "20",
                 "--k", "5", "--rtol", "1e-8", "--out", str(out)])
    assert code == 0
    rep = read_report(out)
    assert {r[1] for r in rep.rows} == {0, 1, 2}
    assert all(rep.trace(0, i)[1][-1] <= 1e-8 for i in range(3))


def test_cli_solve_spec_file(tmp_path):
    spec = tmp_path / "run.spec"
    out = tmp_path / "r.csv"
    spec.write_text(f"matrix = builtin:bidiag:200\nshifts = 0,-2\nm = 20\nk = 5\nnrhs = 2\nout = {out}\n")
    assert main(["solve", str(spec), "--rtol", "1e-7"]) == 0
    rep = read_report(out)
    assert {r[0] for r in rep.rows} == {-1, 0, 1}


def test_cli_empty_shifts_is_validation_error(tmp_path, capsys):
    code = main(["solve", "--shifts", "", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "empty" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_cli_budget_exit_code(tmp_path):
    code = main(["solve", "--matrix", "builtin:bidiag:500", "--m", "10", "--k", "0", "--rtol", "1e-12",
                 "--max-mv", "50", "--out", str(tmp_path / "x.csv")])
    assert code == 4


def test_cli_numerical_failure_exit_code(tmp_path):
    p = tmp_path / "sing.mtx"
    write_matrix_market(p, np.diag([1.0, 2.0, 3.0, 4.0]))
    # shift 2 is an eigenvalue: the reduced problem is singular once the space is invariant
    code = main(["solve", "--matrix", f"mm:{p}", "--shifts", "0,2", "--m", "4", "--k", "0",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_cli_example1(tmp_path):
    assert main(["experiment", "example1", "--out", str(tmp_path)]) == 0
    dr = read_report(tmp_path / "example1_dr.csv")
    plain = read_report(tmp_path / "example1_gmres.csv")
    for i in range(3):
        assert dr.trace(0, i)[1][-1] <= 1e-10
    # deflation wins for the base system
    assert dr.trace(0, 0)[0][-1] < plain.trace(0, 0)[0][-1]


def test_cli_example5_three_phases(tmp_path):
    assert main(["experiment", "example5", "--out", str(tmp_path)]) == 0
    rep = read_report(tmp_path / "example5.csv")
    assert {r[0] for r in rep.rows} == {-1, 0, 1}
    assert rep.trace(1, 1, corrected=True)[0].size > 0
    assert rep.trace(1, 1, corrected=False)[0].size > 0


def test_ritz_full_space_equals_spectrum(tmp_path):
    rows = experiments.ritz_dump(0.0, 10, 1, n=10, seed=0, nearest=10)
    eig = np.r_[0.1, np.arange(1, 10)]
    for kind in ("harmonic", "ritz"):
        vals = np.sort(np.array([z for _, k, z in rows if k == kind]).real)
        assert np.allclose(vals, eig, atol=1e-8)


def test_ritz_csv_round_trip(tmp_path):
    out = tmp_path / "ritz.csv"
    assert main(["ritz", "--shift", "0.4", "--m", "20", "--cycles", "3", "--n", "200", "--out", str(out)]) == 0
    back = read_ritz_csv(out)
    ref = experiments.ritz_dump(0.4, 20, 3, n=200)
    assert back == ref
    with open(out) as fh:
        assert next(csv.reader(fh)) == ["cycle", "kind", "re", "im"]
    assert {c for c, _, _ in back} == {0, 1, 2}


def test_harmonic_ritz_avoid_base_shift():
    rows = experiments.ritz_dump(0.4, 40, 50)
    harm = min(abs(z - 0.4) for _, k, z in rows if k == "harmonic")
    reg = min(abs(z - 0.4) for _, k, z in rows if k == "ritz")
    assert harm >= 10 * reg


def test_table_single_row(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["table", "table4_1", "--ks", "4", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["k", "eig_res", "mvps", "lin_res"] and len(rows) == 2
    assert rows[1][0] == "4"
    out2 = tmp_path / "t2.csv"
    assert main(["table", "table4_2", "--rtols", "1e-6", "--extra-rtols", "1e-6", "--out", str(out2)]) == 0
    rows = list(csv.reader(open(out2)))
    assert len(rows) == 2 and rows[0] == ["rtol", "before", "1e-06"]
