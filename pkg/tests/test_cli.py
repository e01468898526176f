"""Command-line interface behavior."""

from click.testing import CliRunner

from capaplan.cli import main

from conftest import FIXTURES, SCENARIOS


def test_model_validate_accepts_fixture():
    result = CliRunner().invoke(main, ["model", "validate", str(FIXTURES / "mps500.json")])
    assert result.exit_code == 0
    assert "valid:" in result.output


def test_model_validate_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"resources": [], "capabilities": [{"iri": "x"}]}', encoding="utf-8")
    result = CliRunner().invoke(main, ["model", "validate", str(bad)])
    assert result.exit_code == 1
    assert "invalid:" in result.output


def test_model_convert_round_trips(tmp_path):
    runner = CliRunner()
    turtle = runner.invoke(
        main, ["model", "convert", str(FIXTURES / "mps500.json"), "--to", "turtle"]
    )
    assert turtle.exit_code == 0
    ttl_path = tmp_path / "m.ttl"
    ttl_path.write_text(turtle.output, encoding="utf-8")
    back = runner.invoke(main, ["model", "convert", str(ttl_path), "--to", "json"])
    assert back.exit_code == 0
    from capaplan.model import canonical_model, parse_model

    original = canonical_model(
        parse_model((FIXTURES / "mps500.json").read_text(encoding="utf-8"))
    )
    assert canonical_model(parse_model(back.output)) == original


def test_run_single_scenario():
    result = CliRunner().invoke(
        main, ["run", "--scenario", str(SCENARIOS / "kq_01.json")]
    )
    assert result.exit_code == 0
    assert "KQ-01: fully" in result.output


def test_suite_writes_report_and_figure(tmp_path):
    result = CliRunner().invoke(
        main, ["suite", str(SCENARIOS), "--out", str(tmp_path), "--reps", "1"]
    )
    assert result.exit_code == 0
    csv_text = (tmp_path / "scenario_report.csv").read_text(encoding="utf-8")
    assert csv_text.splitlines()[0] == "scenario,category,verdict,repetitions,agree"
    assert len(csv_text.splitlines()) == 24  # header + 23 cases
    png = (tmp_path / "scenario_report.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
