"""Config parsing, pipeline orchestration, and the command line interface."""

import json

import pytest
from click.testing import CliRunner

from helpers import CONFIG_DIR
from subeq.cli import main
from subeq.config import ConfigError, load_config, parse_config, parse_word
from subeq.pipeline import run_pipeline


def _write(tmp_path, raw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


BAD_BUNCH = {
    "system": {
        "adjacency": [[1, 1], [1, 1]],
        "cocycle": {"d": 2, "k": 1, "alpha": 1.0,
                    "entries": [{"window": w, "matrix": [[9.0, 0.0], [0.0, 1.0]]}
                                for w in ("00", "01", "10", "11")]},
    },
    "analyses": [{"op": "holonomy", "cycle": "0", "bridge": "1", "side": "u"}],
}


# ---------------------------------------------------------------------------
# Config parsing


def test_parse_word_forms():
    assert parse_word("0110") == (0, 1, 1, 0)
    assert parse_word([0, 1]) == (0, 1)
    assert parse_word(()) == ()


def test_config_requires_adjacency():
    with pytest.raises(ConfigError, match="adjacency"):
        parse_config({"analyses": []})


def test_config_default_identity_cocycle():
    cfg = parse_config({"system": {"adjacency": [[1, 1], [1, 0]]},
                        "analyses": []})
    assert cfg.cocycle.d == 1 and cfg.cocycle.k == 0
    assert cfg.potential.value((0, 1)) == 1.0


def test_config_rejects_unknown_op_and_bad_params():
    base = {"system": {"adjacency": [[1, 1], [1, 1]]}}
    with pytest.raises(ConfigError, match="unknown analysis op"):
        parse_config({**base, "analyses": [{"op": "entropy"}]})
    with pytest.raises(ConfigError, match="missing parameter"):
        parse_config({**base, "analyses": [{"op": "gibbs"}]})
    with pytest.raises(ConfigError, match="eps"):
        parse_config({**base, "analyses": [
            {"op": "kscan", "m1": 1, "m2": 2, "eps": 2.0}]})


def test_config_orders_analyses_by_dependency():
    cfg = parse_config({
        "system": {"adjacency": [[1, 1], [1, 1]]},
        "analyses": [{"op": "gibbs", "n": 3}, {"op": "pressure", "n_max": 4},
                     {"op": "bunching"}],
    })
    assert [a["op"] for a in cfg.analyses] == ["bunching", "pressure", "gibbs"]


def test_load_config_bad_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)


# ---------------------------------------------------------------------------
# Pipeline


def test_pipeline_shares_pressure_with_gibbs(tmp_path):
    cfg = parse_config({
        "system": {"adjacency": [[1, 1], [1, 1]],
                   "cocycle": {"d": 1, "k": 0, "alpha": 1.0,
                               "entries": [{"window": "0", "matrix": [[1.0]]},
                                           {"window": "1", "matrix": [[2.0]]}]}},
        "analyses": [{"op": "pressure", "n_max": 8}, {"op": "gibbs", "n": 4}],
    })
    report, code = run_pipeline(cfg, None, render_figures=False)
    assert code == 0
    ops = {r["op"]: r["result"] for r in report["results"]}
    assert ops["gibbs"]["pressure"] == ops["pressure"]["extrapolated"]
    assert "config_hash" in report and "timings" in report


def test_pipeline_numeric_failure_keeps_partial_results(tmp_path):
    raw = dict(BAD_BUNCH)
    raw["analyses"] = [{"op": "bunching"}] + raw["analyses"]
    report, code = run_pipeline(parse_config(raw), None, render_figures=False)
    assert code == 3
    assert report["failed_after"]["op"] == "holonomy"
    assert report["results"][0]["op"] == "bunching"
    assert report["results"][0]["result"]["verdict"] == "FAIL"


# ---------------------------------------------------------------------------
# CLI


def test_cli_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    result = CliRunner().invoke(main, [
        "run", str(CONFIG_DIR / "golden_mean_identity.json"), "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    assert {r["op"] for r in report["results"]} >= {"pressure", "gibbs", "lps"}
    names = {p.name for p in out.iterdir()}
    assert any(n.startswith("gibbs_weights") and n.endswith(".csv") for n in names)
    assert any(n.startswith("pressure") and n.endswith(".png") for n in names)


def test_cli_run_no_figures(tmp_path):
    out = tmp_path / "out"
    result = CliRunner().invoke(main, [
        "run", str(CONFIG_DIR / "full_shift_scalar.json"),
        "--out", str(out), "--no-figures"])
    assert result.exit_code == 0, result.output
    assert not any(p.suffix == ".png" for p in out.iterdir())
    assert (out / "report.json").exists()


def test_cli_exit_codes(tmp_path):
    r = CliRunner().invoke(main, ["run", str(tmp_path / "nope.json")])
    assert r.exit_code == 2
    bad = _write(tmp_path, BAD_BUNCH)
    r = CliRunner().invoke(main, ["run", str(bad), "--out", str(tmp_path / "o")])
    assert r.exit_code == 3
    assert "holonomy" in r.output


def test_cli_seed_override(tmp_path):
    out = tmp_path / "out"
    result = CliRunner().invoke(main, [
        "run", str(CONFIG_DIR / "full_shift_scalar.json"),
        "--out", str(out), "--no-figures", "--seed", "42"])
    assert result.exit_code == 0
    assert json.loads((out / "report.json").read_text())["seed"] == 42


def test_cli_single_analysis_commands():
    cfg = str(CONFIG_DIR / "full_shift_scalar.json")
    r = CliRunner().invoke(main, ["pressure", "--config", cfg, "--n-max", "6"])
    assert r.exit_code == 0
    assert json.loads(r.output)["upper_bound"] == pytest.approx(1.0986122886681098)
    r = CliRunner().invoke(main, ["qm", "--config", cfg, "--n", "2",
                                  "--k-max", "1"])
    assert json.loads(r.output)["ok"] is True
    r = CliRunner().invoke(main, ["irreducibility", "--config", cfg])
    assert json.loads(r.output)["dimension"] == 1


def test_cli_dbar_command(tmp_path):
    left = tmp_path / "left.csv"
    right = tmp_path / "right.csv"
    left.write_text("sequence,mass\n00,0.5\n11,0.5\n")
    right.write_text("sequence,mass\n00,1.0\n")
    r = CliRunner().invoke(main, ["dbar", "--left", str(left),
                                  "--right", str(right), "--n", "2"])
    assert r.exit_code == 0, r.output
    out = json.loads(r.output)
    assert out["value"] == pytest.approx(0.5, abs=1e-10)
    assert out["gap"] <= 1e-9
