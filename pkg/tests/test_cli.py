import pytest

from pagersim import cli
from support import fixture_scn


@pytest.fixture
def scn(tmp_path):
    path = tmp_path / "case.scn"
    path.write_text(fixture_scn("table1"))
    return path


def test_single_scheme_run(scn, capsys):
    rc = cli.main(["--scenario", str(scn), "--scheme", "proposed"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "proposed: faults=1 events=13 warnings=0" in out


def test_all_schemes_run_in_report_order(scn, capsys):
    rc = cli.main(["--scenario", str(scn)])
    out = capsys.readouterr().out
    assert rc == 0
    tokens = [line.split(":")[0] for line in out.splitlines() if "faults=" in line]
    assert tokens == ["monolithic", "l4-single", "proposed", "l4re"]


def test_trace_file_single_scheme(scn, tmp_path, capsys):
    target = tmp_path / "out.trace"
    rc = cli.main(
        ["--scenario", str(scn), "--scheme", "monolithic", "--trace", str(target)]
    )
    assert rc == 0
    assert "trace written to" in capsys.readouterr().out
    body = target.read_text()
    assert body.startswith("0 MODE_SWITCH_U2K cycle=0\n")
    assert body.endswith("3 MODE_SWITCH_K2U cycle=0\n")


def test_trace_files_fan_out_per_scheme(scn, tmp_path):
    target = tmp_path / "out.trace"
    rc = cli.main(["--scenario", str(scn), "--trace", str(target)])
    assert rc == 0
    for token in ("monolithic", "l4-single", "proposed", "l4re"):
        assert (tmp_path / f"out.{token}.trace").exists()
    assert not target.exists()


def test_check_pass_and_fail(scn, tmp_path, capsys):
    assert cli.main(["--scenario", str(scn), "--check"]) == 0
    out = capsys.readouterr().out
    assert "check: 4 expectation line(s), 0 failure(s)" in out

    bad = tmp_path / "bad.scn"
    bad.write_text(
        fixture_scn("table1")
        + "expect scheme=proposed fault=0 verdict=NO_PAGER\n"
    )
    assert cli.main(["--scenario", str(bad), "--check"]) == 1
    out = capsys.readouterr().out
    assert "failure(s)" in out
    assert "expected NO_PAGER" in out


def test_verify_equivalence_ok(scn, capsys):
    rc = cli.main(["--scenario", str(scn), "--verify-equivalence"])
    assert rc == 0
    assert "equivalence: ok" in capsys.readouterr().out


def test_report_table(scn, capsys):
    rc = cli.main(["--scenario", str(scn), "--report", "table"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "scheme" in out and "mode_switches" in out
    assert "reduction l4re->proposed:" in out


def test_report_kv(scn, capsys):
    rc = cli.main(["--scenario", str(scn), "--report", "kv"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "scheme=l4re" in out
    assert "reduction_mode_switches=1/3" in out
    assert "reduction_context_switches=1/3" in out


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    rc = cli.main(["--scenario", str(tmp_path / "nope.scn")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_scenario_error_is_reported(tmp_path, capsys):
    path = tmp_path / "broken.scn"
    path.write_text("thread T tid=0 asid=1 role=applicant\n")
    rc = cli.main(["--scenario", str(path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_scheme_mismatch_is_reported(tmp_path, capsys):
    path = tmp_path / "mismatch.scn"
    path.write_text(
        "layout regions=8 pages_per_region=4 page_size=4096\n"
        "option mode=manual\n"
        "thread T tid=1 asid=1 role=applicant\n"
        "thread P tid=2 asid=2 role=pager\n"
        "pager P policy=anonymous\n"
        "assign asid=1 rid=0 pager=P\n"
        "access T 0x0 read\n"
        "pager-step P\n"
    )
    rc = cli.main(["--scenario", str(path), "--scheme", "monolithic"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_scheme_rejected_by_argparse(scn):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--scenario", str(scn), "--scheme", "mach"])
    assert exc.value.code == 2
