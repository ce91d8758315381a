from __future__ import annotations

import math
from pathlib import Path

import pytest
import yaml

from dimspectra.cli import emit_csv, load_config, main, parse_config, serialize_config
from dimspectra.errors import ConfigError, IoError

LOG2 = math.log(2.0)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def base_config(tmp_path: Path, **command) -> dict:
    cmd = {
        "name": "bcurve",
        "a_grid": {"start": -1.0, "stop": 1.0, "count": 3},
        "tol": 1e-10,
        "max_level": 12,
    }
    cmd.update(command)
    return {
        "map": {"family": "doubling"},
        "potential": {
            "kind": "locally_constant",
            "table": {"0": -LOG2, "1": -LOG2},
        },
        "command": cmd,
        "output": {"csv": str(tmp_path / "out.csv")},
    }


def write_config(tmp_path: Path, data: dict, name: str = "cfg.yaml") -> Path:
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def test_bcurve_run_writes_artifacts(tmp_path, capsys):
    path = write_config(tmp_path, base_config(tmp_path))
    assert main([str(path)]) == 0
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == "a,b,b_low,b_high,on_ray"
    assert lines[1:] == ["-1,0,0,0,0", "0,1,1,1,0", "1,2,2,2,0"]
    manifest = yaml.safe_load((tmp_path / "out.manifest.yaml").read_text())
    assert manifest["command"] == "bcurve"
    assert manifest["status"] == "ok"
    assert manifest["artifacts"][0]["rows"] == 3
    assert len(manifest["config_sha256"]) == 64


def test_rerun_is_byte_identical(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    assert main([str(path)]) == 0
    first_csv = (tmp_path / "out.csv").read_bytes()
    first_manifest = (tmp_path / "out.manifest.yaml").read_bytes()
    assert main([str(path)]) == 0
    assert (tmp_path / "out.csv").read_bytes() == first_csv
    assert (tmp_path / "out.manifest.yaml").read_bytes() == first_manifest


def test_set_overrides(tmp_path):
    path = write_config(tmp_path, base_config(tmp_path))
    other = tmp_path / "other.csv"
    assert (
        main([str(path), "--set", f"output.csv={other}", "--set", "command.a_grid.count=2"])
        == 0
    )
    assert len(other.read_text().splitlines()) == 3


def test_unknown_keys_rejected(tmp_path, capsys):
    for mutate, key in (
        (lambda d: d.update(extra=1), "config.extra"),
        (lambda d: d["map"].update(slope=2), "map.slope"),
        (lambda d: d["command"].update(depth=3), "command.depth"),
        (lambda d: d["output"].update(json=True), "output.json"),
        (lambda d: d["command"]["a_grid"].update(step=0.1), "command.a_grid.step"),
    ):
        data = base_config(tmp_path)
        mutate(data)
        path = write_config(tmp_path, data)
        assert main([str(path)]) == 1
        err = capsys.readouterr().err
        assert "ConfigError" in err
        assert key in err


def test_range_validation(tmp_path, capsys):
    cases = (
        ({"tol": -1.0}, "command.tol"),
        ({"max_level": 0}, "command.max_level"),
        ({"a_grid": {"start": 0.0, "stop": 1.0, "count": 0}}, "count"),
    )
    for patch, needle in cases:
        data = base_config(tmp_path, **patch)
        path = write_config(tmp_path, data)
        assert main([str(path)]) == 1
        assert needle in capsys.readouterr().err


def test_missing_potential_table_word(tmp_path, capsys):
    data = base_config(tmp_path)
    del data["potential"]["table"]["1"]
    path = write_config(tmp_path, data)
    assert main([str(path)]) == 1
    assert "InadmissibleSupport" in capsys.readouterr().err


def test_overlapping_linear_markov_validates_to_error(tmp_path, capsys):
    data = {
        "map": {
            "family": "linear_markov",
            "branches": [
                {"domain": [0.0, 0.6], "image": [0.0, 1.0], "orientation": 1},
                {"domain": [0.5, 1.0], "image": [0.0, 1.0], "orientation": 1},
            ],
        },
        "potential": {"kind": "geometric", "coefficient": -1.0},
        "command": {"name": "validate"},
        "output": {},
    }
    path = write_config(tmp_path, data)
    assert main([str(path)]) == 1
    assert "MarkovViolation" in capsys.readouterr().err


def test_validate_prints_summary(tmp_path, capsys):
    data = {
        "map": {"family": "golden_mean"},
        "potential": {"kind": "geometric", "coefficient": -1.0},
        "command": {"name": "validate"},
        "output": {},
    }
    path = write_config(tmp_path, data)
    assert main([str(path)]) == 0
    out = capsys.readouterr().out
    assert "family: golden_mean" in out
    assert "full_shift: False" in out


def test_starved_run_exits_two_with_enclosure(tmp_path, capsys):
    data = {
        "map": {"family": "golden_mean"},
        "potential": {
            "kind": "locally_constant",
            "table": {"0": 0.0, "1": 0.0},
        },
        "command": {"name": "pressure", "tol": 1e-13, "max_level": 4},
        "output": {"csv": str(tmp_path / "p.csv")},
    }
    path = write_config(tmp_path, data)
    assert main([str(path)]) == 2
    rows = (tmp_path / "p.csv").read_text().splitlines()
    assert rows[1].endswith("enclosure")
    manifest = yaml.safe_load((tmp_path / "p.manifest.yaml").read_text())
    assert manifest["status"] == "enclosure"
    truth = math.log((1.0 + math.sqrt(5.0)) / 2.0)
    _, lower, upper, _, _ = rows[1].split(",")
    assert float(lower) <= truth <= float(upper)


def test_missing_config_file(tmp_path, capsys):
    assert main([str(tmp_path / "nope.yaml")]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_invalid_yaml(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("map: [unclosed", encoding="utf-8")
    assert main([str(path)]) == 1
    assert "not valid YAML" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert capsys.readouterr().out.startswith("dimspectra ")


def test_shipped_configs_round_trip():
    paths = sorted(CONFIG_DIR.glob("*.yaml"))
    assert len(paths) == 8
    for path in paths:
        cfg = load_config(path)
        text = serialize_config(cfg)
        again = parse_config(yaml.safe_load(text))
        assert serialize_config(again) == text


def test_emit_csv_formatting(tmp_path):
    out = tmp_path / "t.csv"
    emit_csv(
        ["x", "flag", "n", "y"],
        [[0.1, True, 3, math.inf], [-1.5, False, -2, math.nan]],
        out,
        precision=17,
    )
    text = out.read_text()
    assert text.endswith("\n")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[1] == "0.10000000000000001,1,3,inf"
    assert lines[2] == "-1.5,0,-2,nan"


def test_emit_csv_row_width_check(tmp_path):
    with pytest.raises(ValueError):
        emit_csv(["a", "b"], [[1.0]], tmp_path / "bad.csv")


def test_emit_csv_unwritable_path(tmp_path):
    blocker = tmp_path / "plainfile"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(IoError):
        emit_csv(["a"], [[1.0]], blocker / "sub.csv")


def test_spectrum_command_artifact(tmp_path):
    data = {
        "map": {"family": "doubling"},
        "potential": {
            "kind": "locally_constant",
            "table": {"0": math.log(0.25), "1": math.log(0.75)},
        },
        "command": {
            "name": "spectrum",
            "alpha_grid": {"start": 0.6, "stop": 1.2, "count": 4},
            "tol": 1e-9,
            "max_level": 14,
        },
        "output": {"csv": str(tmp_path / "s.csv")},
    }
    path = write_config(tmp_path, data)
    assert main([str(path)]) == 0
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "a,b,b_low,b_high,alpha,f,f_low,f_high"
    assert len(lines) == 5
    manifest = yaml.safe_load((tmp_path / "s.manifest.yaml").read_text())
    assert manifest["checks"]["concavity_margin"] <= 1e-6


def test_endpoints_inf_literal(tmp_path):
    data = {
        "map": {"family": "farey"},
        "potential": {
            "kind": "locally_constant",
            "table": {"0": -LOG2, "1": -LOG2},
        },
        "command": {"name": "endpoints", "level": 6},
        "output": {"csv": str(tmp_path / "e.csv")},
    }
    path = write_config(tmp_path, data)
    assert main([str(path)]) == 0
    body = (tmp_path / "e.csv").read_text()
    assert "inf" in body.splitlines()[1]
