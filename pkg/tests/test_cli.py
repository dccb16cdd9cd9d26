"""Command-line interface tests.

Runs the entry point in process and checks stdout, files, and exit
codes; a single subprocess test covers module execution.
"""

import csv
import io
import subprocess
import sys

import pytest

from nakaber.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_kv_line(line):
    return dict(part.split("=", 1) for part in line.strip().split(" "))


# --- aber --------------------------------------------------------------------

def test_aber_lu_line(capsys):
    code, out, _ = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                           "--snr-db", "0", "--method", "lu")
    assert code == 0
    kv = parse_kv_line(out)
    assert float(kv["aber"]) == pytest.approx(0.14644660940672624, rel=1e-14)
    assert kv["method"] == "lu"
    assert kv["m"] == "1"
    assert kv["mod"] == "4"


def test_aber_closed_reports_terms(capsys):
    code, out, _ = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                           "--snr-db", "0", "--method", "closed",
                           "--terms", "5")
    assert code == 0
    kv = parse_kv_line(out)
    assert float(kv["aber"]) == pytest.approx(0.13770205555632142915, rel=1e-11)
    assert kv["method"] == "closed(N=5)"
    assert kv["terms"] == "1"  # terminating series at m = 1


def test_aber_oracle_reports_estimate(capsys):
    code, out, _ = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                           "--snr-db", "0", "--method", "oracle")
    assert code == 0
    kv = parse_kv_line(out)
    assert kv["converged"] == "True"
    assert float(kv["error_estimate"]) < 1e-9
    assert float(kv["aber"]) == pytest.approx(0.13770205555632142915, rel=1e-8)


def test_aber_low_snr_example(capsys):
    code, out, _ = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                           "--snr-db", "-100", "--method", "closed",
                           "--terms", "0")
    assert code == 0
    assert float(parse_kv_line(out)["aber"]) == pytest.approx(0.4375, abs=1e-4)


def test_aber_closed_matches_oracle_to_example_tolerance(capsys):
    _, out_c, _ = run_cli(capsys, "aber", "--m", "0.6", "--mod", "256",
                          "--snr-db", "10", "--method", "closed", "--terms", "5")
    closed = float(parse_kv_line(out_c)["aber"])
    _, out_o, _ = run_cli(capsys, "aber", "--m", "0.6", "--mod", "256",
                          "--snr-db", "10", "--method", "oracle")
    oracle = float(parse_kv_line(out_o)["aber"])
    assert closed == pytest.approx(oracle, rel=1e-6)


def test_aber_adaptive_tolerance_flag(capsys):
    code, out, _ = run_cli(capsys, "aber", "--m", "2.5", "--mod", "16",
                           "--snr-db", "5", "--method", "closed",
                           "--adaptive-tol", "1e-12")
    assert code == 0
    assert parse_kv_line(out)["method"] == "closed(adaptive)"


def test_aber_expq_pairs_equal_to_default_keep_its_label(capsys):
    # spelling out the canonical pairs parses back to the same variant
    _, out_default, _ = run_cli(capsys, "aber", "--m", "2.5", "--mod", "256",
                                "--snr-db", "10", "--method", "expq")
    _, out_custom, _ = run_cli(capsys, "aber", "--m", "2.5", "--mod", "256",
                               "--snr-db", "10", "--method", "expq",
                               "--expq", "0.08333333333333333:0.5,0.25:0.6666666666666666")
    kv_d = parse_kv_line(out_default)
    kv_c = parse_kv_line(out_custom)
    assert kv_d["method"] == "expq(chiani)"
    assert kv_c["method"] == "expq(chiani)"
    assert float(kv_c["aber"]) == pytest.approx(float(kv_d["aber"]), rel=1e-15)


def test_aber_expq_different_pairs_get_custom_label(capsys):
    code, out, _ = run_cli(capsys, "aber", "--m", "2.5", "--mod", "256",
                           "--snr-db", "10", "--method", "expq",
                           "--expq", "0.3:0.6,0.1:0.4")
    assert code == 0
    kv = parse_kv_line(out)
    assert kv["method"] == "expq(custom)"
    assert 0.0 < float(kv["aber"]) < 1.0


# --- usage errors ------------------------------------------------------------

def test_unsupported_modulation_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "aber", "--m", "1", "--mod", "8",
                           "--snr-db", "0", "--method", "lu")
    assert code == 2
    assert "order" in err


def test_multiple_methods_rejected_for_single_point(capsys):
    code, _, err = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                           "--snr-db", "0", "--method", "closed,lu")
    assert code == 2


def test_bad_range_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "sweep", "--m", "1", "--mod", "4",
                           "--snr-db-range", "5:1:1", "--method", "lu")
    assert code == 2


def test_unknown_method_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                           "--snr-db", "0", "--method", "magic")
    assert code == 2
    assert "method" in err


def test_thin_bench_reps_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "bench", "--m", "0.6", "--mod", "256",
                           "--snr-db", "10", "--terms", "0", "--reps", "1")
    assert code == 2


def test_missing_snr_flags_is_usage_error(capsys):
    code, _, _ = run_cli(capsys, "aber", "--m", "1", "--mod", "4",
                         "--method", "lu")
    assert code == 2


# --- sweep -------------------------------------------------------------------

def test_sweep_csv_schema_and_row_count(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--m", "4.1", "--mod", "256",
                           "--snr-db-range", "0:30:1",
                           "--method", "closed,lu,oracle", "--terms", "0")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["snr_db", "method", "value", "terms", "wall_time_ns"]
    assert len(rows) == 1 + 93
    # 17 significant digits survive the round trip
    for row in rows[1:4]:
        assert float(row[2]) == float(repr(float(row[2])))


def test_sweep_no_timing_drops_column_and_is_reproducible(capsys):
    args = ("sweep", "--m", "1", "--mod", "16", "--snr-db-range", "0:6:2",
            "--method", "closed,lu", "--no-timing")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    header = out1.splitlines()[0]
    assert header == "snr_db,method,value,terms"


def test_sweep_out_file_and_jobs(tmp_path, capsys):
    target = tmp_path / "grid.csv"
    code, out, _ = run_cli(capsys, "sweep", "--m", "1", "--mod", "16",
                           "--snr-db-range", "0:6:2", "--method", "closed,lu",
                           "--jobs", "4", "--no-timing", "--out", str(target))
    assert code == 0
    assert out == ""
    rows = list(csv.reader(target.open()))
    assert len(rows) == 1 + 4 * 2

    inline_code, inline_out, _ = run_cli(
        capsys, "sweep", "--m", "1", "--mod", "16", "--snr-db-range", "0:6:2",
        "--method", "closed,lu", "--no-timing")
    assert inline_code == 0
    assert target.read_text() == inline_out


def test_sweep_negative_range_needs_equals_form(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--m", "2.5", "--mod", "16",
                           "--snr-db-range=-6:0:3", "--method", "lu",
                           "--no-timing")
    assert code == 0
    assert [r.split(",")[0] for r in out.splitlines()[1:]] == ["-6", "-3", "0"]


def test_sweep_unit_interval_guard(capsys):
    code, _, err = run_cli(capsys, "sweep", "--m", "0.6", "--mod", "4096",
                           "--snr-db-range=-12:-8:2", "--method", "lu")
    assert code == 2
    assert "outside [0, 1]" in err


# --- discrepancy -------------------------------------------------------------

def test_discrepancy_csv(capsys):
    code, out, _ = run_cli(capsys, "discrepancy", "--m", "0.6", "--mod", "256",
                           "--snr-db-range", "0:3:1", "--method", "closed,lu",
                           "--terms", "0")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["snr_db", "candidate_method", "epsilon_db"]
    assert len(rows) == 1 + 4 * 2
    closed_eps = [float(r[2]) for r in rows[1:] if r[1] == "closed(N=0)"]
    lu_eps = [float(r[2]) for r in rows[1:] if r[1] == "lu"]
    assert all(c < l for c, l in zip(closed_eps, lu_eps))


def test_discrepancy_serializes_minus_inf(capsys):
    code, out, _ = run_cli(capsys, "discrepancy", "--m", "1", "--mod", "4",
                           "--snr-db-range", "0:2:2", "--method", "oracle")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert all(r[2] == "-inf" for r in rows[1:])


# --- bench -------------------------------------------------------------------

def test_bench_csv(capsys):
    code, out, _ = run_cli(capsys, "bench", "--m", "0.6", "--mod", "256",
                           "--snr-db", "10", "--terms", "0,3", "--reps", "10")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["snr_db", "n_terms", "t_closed_ns", "t_oracle_ns",
                       "epsilon_t"]
    assert [r[1] for r in rows[1:]] == ["0", "3"]
    for r in rows[1:]:
        assert float(r[4]) == pytest.approx(float(r[3]) / float(r[2]), rel=1e-12)


# --- selftest ----------------------------------------------------------------

def test_selftest_list(capsys):
    code, out, _ = run_cli(capsys, "selftest", "--list")
    assert code == 0
    assert out.split() == ["lemma1", "lemma2", "lemma3", "reflection",
                           "termination", "sandwich"]


def test_selftest_single_group(capsys):
    code, out, _ = run_cli(capsys, "selftest", "--group", "termination")
    assert code == 0
    assert "termination" in out
    assert "FAIL" not in out


def test_selftest_full_run_passes(capsys):
    code, out, _ = run_cli(capsys, "selftest")
    assert code == 0
    assert "0 failures" in out


def test_selftest_unknown_group(capsys):
    code, _, err = run_cli(capsys, "selftest", "--group", "lemma9")
    assert code == 2


# --- config files ------------------------------------------------------------

def test_config_supplies_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# grid shared by the comparison plots\n"
        "m = 1\n"
        "mod = 16\n"
        "snr_db_range = 0:6:2\n"
        "method = closed,lu\n"
        "no_timing = true\n")
    code, out, _ = run_cli(capsys, "sweep", "--config", str(cfg))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 1 + 4 * 2


def test_explicit_flag_beats_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("m = 1\nmod = 16\nsnr-db = 0\nmethod = lu\n")
    code, out, _ = run_cli(capsys, "aber", "--config", str(cfg),
                           "--mod", "4")
    assert code == 0
    kv = parse_kv_line(out)
    assert kv["mod"] == "4"
    assert float(kv["aber"]) == pytest.approx(0.14644660940672624, rel=1e-12)


def test_missing_config_is_io_error(capsys):
    code, _, err = run_cli(capsys, "aber", "--config", "/no/such/file.cfg",
                           "--m", "1", "--mod", "4", "--snr-db", "0",
                           "--method", "lu")
    assert code == 4


def test_unwritable_out_is_io_error(capsys):
    code, _, err = run_cli(capsys, "sweep", "--m", "1", "--mod", "4",
                           "--snr-db-range", "0:2:1", "--method", "lu",
                           "--out", "/nonexistent-dir/x.csv")
    assert code == 4


# --- plot emission -----------------------------------------------------------

def test_emit_plot_scripts_compile(tmp_path, capsys):
    for sub, extra in (("sweep", ["--method", "closed,lu"]),
                       ("discrepancy", ["--method", "closed,lu"]),
                       ("bench", ["--terms", "0,2", "--reps", "10"])):
        plot = tmp_path / f"{sub}_plot.py"
        argv = [sub, "--m", "0.6", "--mod", "256", "--emit-plot", str(plot)]
        if sub == "bench":
            argv += ["--snr-db", "10"]
        else:
            argv += ["--snr-db-range", "0:2:1"]
        argv += extra
        code, _, _ = run_cli(capsys, *argv)
        assert code == 0, sub
        source = plot.read_text()
        compile(source, str(plot), "exec")
        assert "matplotlib" in source


# --- module entry point ------------------------------------------------------

def test_module_execution_smoke():
    out = subprocess.run(
        [sys.executable, "-m", "nakaber", "aber", "--m", "1", "--mod", "4",
         "--snr-db", "0", "--method", "lu"],
        capture_output=True, text=True, check=True)
    kv = parse_kv_line(out.stdout)
    assert float(kv["aber"]) == pytest.approx(0.14644660940672624, rel=1e-14)
