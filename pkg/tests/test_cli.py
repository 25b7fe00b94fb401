import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltashell.cli import (EXIT_COMPUTE, EXIT_IO, EXIT_OK, EXIT_USAGE, UsageError, emit, main,
                            parse_args, render, run_scan)


def read_csv(path):
    lines = open(path).read().splitlines()
    meta = {}
    for ln in lines:
        if ln.startswith("# ") and not ln.startswith("# warning:"):
            key, val = ln[2:].split(": ", 1)
            meta[key] = json.loads(val)
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    return meta, rows


def test_parse_low_energy_scan():
    spec = parse_args("low-energy --g-min -5 --g-max 5 --points 101".split())
    assert spec.subcommand == "low-energy" and spec.variable == "g"
    assert (spec.lo, spec.hi, spec.points) == (-5.0, 5.0, 101)
    assert spec.values()[50] == pytest.approx(0.0)


def test_parse_transport_scan():
    spec = parse_args(("transport --inv-a 0 --stats spin-1/2 --tau-min 1e-4 --tau-max 10 "
                       "--points 60 --spacing log --order 1").split())
    assert spec.variable == "tau" and spec.fixed["g"] == 1.0
    v = spec.values()
    assert v[0] == pytest.approx(1e-4) and v[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(np.log(v)), np.log(1e5) / 59)


def test_parse_eta_s_min_scan():
    spec = parse_args(("eta-s-min --dilution 0.01 --inv-a-min -1 --inv-a-max 0.9 "
                       "--points 200 --order 2").split())
    assert spec.variable == "inv_a" and spec.points == 200
    assert spec.fixed["dilution"] == [0.01] and spec.fixed["order"] == 2


@pytest.mark.parametrize("argv,flag", [
    ("low-energy --g-min 5 --g-max -5 --points 3", "--g-min"),
    ("transport --g 1 --tau-min -1 --tau-max 1 --points 3 --spacing log", "--spacing"),
    ("transport --g 1", "--tau-min"),
    ("eta-s --g 1 --tau-min 0.1 --tau-max 1 --points 3", "--dilution"),
    ("resonance --inv-a-min -1 --inv-a-max 0.9 --points 3", "--tau"),
    ("xsection --inv-a 1 --x-min 1 --x-max 2 --points 2", "--hard-sphere"),
    ("xsection --g 1 --inv-a 0 --x-min 1 --x-max 2 --points 2", "--inv-a"),
    ("xsection --g 1 --x-min 1 --x-max 2 --points 2 --lmax-cap 500", "--lmax-cap"),
    ("xsection --g 1 --x-min 1 --x-max 2 --points 2 --stats anyon", "--stats"),
    ("xsection --g 1 --x-min 1 --x-max 2 --tau-min 1 --tau-max 2", "--tau-min"),
    ("transport --g 1 --tau-min 1 --tau-max 2 --bogus 3", "--bogus"),
    ("units --mass 1e-26", "--radius"),
])
def test_usage_errors_name_the_flag(argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse_args(argv.split())


def test_usage_exit_code(capsys):
    assert main(["transport", "--g", "1"]) == EXIT_USAGE
    assert "usage error" in capsys.readouterr().err
    assert main([]) == EXIT_USAGE


def test_low_energy_dataset_row():
    ds = run_scan(parse_args("low-energy --g-min -2 --g-max 2 --points 5".split()))
    row = dict(zip(ds.columns, ds.rows[4]))
    assert row["g"] == 2.0 and row["a_over_R"] == 2.0 and row["r0_over_R"] == pytest.approx(1.0)
    # g = 0 is the free gas and is still a valid row
    assert ds.flags == [""] * 5


def test_transport_dataset_tracks_asymptote():
    ds = run_scan(parse_args(("transport --inv-a 0 --tau-min 1e-6 --tau-max 1e-5 "
                              "--points 2 --spacing log").split()))
    for row in ds.rows:
        r = dict(zip(ds.columns, row))
        assert 0.98 <= r["D_norm"] / r["asymptote_D"] <= 1.02


def test_single_point_scan():
    ds = run_scan(parse_args("virial --g 2 --tau-min 0.5".split()))
    assert len(ds.rows) == 1 and ds.rows[0][0] == 0.5


def test_csv_emit_and_round_trip(tmp_path):
    out = tmp_path / "x.csv"
    assert main(("xsection --g 3 --x-min 0.1 --x-max 5 --points 4 "
                 f"--out {out}").split()) == EXIT_OK
    meta, rows = read_csv(out)
    assert meta["subcommand"] == "xsection" and meta["g"] == 3.0
    assert len(rows) == 4 and set(rows[0]) == {"x", "q1", "q2", "l_max", "flag"}
    ds = run_scan(parse_args("xsection --g 3 --x-min 0.1 --x-max 5 --points 4".split()))
    for r, ref in zip(rows, ds.rows):
        assert float(r["q1"]) == pytest.approx(ref[1], rel=1e-11)


def test_one_row_file_has_header_and_row(tmp_path):
    out = tmp_path / "one.csv"
    main(["virial", "--g", "2", "--tau-min", "1", "--out", str(out)])
    body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert len(body) == 2


def test_json_emit(tmp_path):
    out = tmp_path / "v.json"
    main(("virial --g 2 --tau-min 0.5 --tau-max 2 --points 3 --format json "
          f"--out {out}").split())
    doc = json.loads(out.read_text())
    assert set(doc["columns"]) == {"tau", "a2", "T_da2_dT"}
    assert len(doc["columns"]["a2"]) == 3 and doc["flag"] == ["", "", ""]


def test_metadata_records_overrides(tmp_path):
    out = tmp_path / "t.csv"
    main(("virial --g 2 --tau-min 1 --tol 1e-8 --lmax-cap 90 "
          f"--out {out}").split())
    meta, _ = read_csv(out)
    assert meta["rel_tol"] == 1e-8 and meta["lmax_cap"] == 90
    assert meta["overrides"] == ["rel_tol", "lmax_cap"]


def test_io_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "missing" / "x.csv"
    assert main(["virial", "--g", "2", "--tau-min", "1", "--out", str(bad)]) == EXIT_IO
    assert str(bad) in capsys.readouterr().err


def test_failed_rows_are_flagged_and_strict_mode(tmp_path):
    argv = "virial --g 40 --tau-min 1e-4 --tau-max 1 --points 2 --spacing log".split()
    ds = run_scan(parse_args(argv))
    assert ds.flags[0] == "error:VirialOverflowError" and ds.flags[1] == ""
    assert math.isnan(ds.rows[0][1]) and ds.rows[0][0] == pytest.approx(1e-4)
    assert ds.warnings
    out = str(tmp_path / "o.csv")
    assert main(argv + ["--out", out]) == EXIT_OK
    assert main(argv + ["--out", out, "--strict"]) == EXIT_COMPUTE


def test_degenerate_rows_flagged():
    ds = run_scan(parse_args(("eta-s --g 0.5 --dilution 0.01 --tau-min 0.01 --tau-max 1 "
                              "--points 2 --spacing log").split()))
    assert ds.flags[0] == "degenerate" and ds.flags[1] == ""


def test_units_subcommand():
    ds = run_scan(parse_args("units --mass 6.646e-27 --radius 1e-10 --dilution 0.01".split()))
    t_tilde, d_tilde, eta_tilde, kappa_tilde = ds.rows[0]
    assert t_tilde > 0 and eta_tilde > 0 and d_tilde > 0 and kappa_tilde > 0


def test_determinism(tmp_path):
    argv = "resonance --tau 0.1 --inv-a-min -0.5 --inv-a-max 0.5 --points 3".split()
    paths = [tmp_path / f"r{i}.csv" for i in range(2)]
    for p in paths:
        assert main(argv + ["--out", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=5))
def test_render_round_trips_to_twelve_digits(values):
    from deltashell.cli import Dataset
    ds = Dataset(("v",), [(v,) for v in values], [""] * len(values), {"k": 1}, [])
    body = [ln for ln in render(ds, "csv").splitlines() if not ln.startswith("#")]
    parsed = [float(r["v"]) for r in csv.DictReader(body)]
    for a, b in zip(parsed, values):
        assert a == pytest.approx(b, rel=1e-11, abs=1e-300)


def test_emit_to_stdout(capsys):
    from deltashell.cli import Dataset
    emit(Dataset(("a",), [(1.0,)], [""], {}, []), "csv")
    assert capsys.readouterr().out.splitlines() == ["a,flag", "1,"]
