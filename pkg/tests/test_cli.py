import json

import pytest
import yaml
from click.testing import CliRunner

from clusterspt.cli import main
from clusterspt.config import ConfigError, ExperimentConfig, load_config


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


SMALL_SCAN = {"kind": "critical-scan", "sizes": [4, 6, 8], "p_grid": [0.15, 0.2],
              "schedule": {"thermalization": 100, "sweeps": 640}, "seed": 3}


def test_map(runner):
    res = runner.invoke(main, ["map", "--p-x", "0.1"])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["J"] == pytest.approx(-__import__("math").log(0.8))
    assert out["h"] == 0.0


def test_map_rejects_bad_rate(runner):
    res = runner.invoke(main, ["map", "--p-x", "0.6"])
    assert res.exit_code != 0 and "outside" in res.output


def test_empty_grid_is_rejected_before_output(runner, tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, {**SMALL_SCAN, "p_grid": [], "out": str(out)})
    res = runner.invoke(main, ["run", "--config", str(cfg)])
    assert res.exit_code != 0 and "p_grid is empty" in res.output
    assert not out.exists()


def test_rerun_is_byte_identical(runner, tmp_path):
    cfg = _write(tmp_path, SMALL_SCAN)
    texts = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        res = runner.invoke(main, ["run", "--config", str(cfg), "--out", str(out)])
        assert res.exit_code in (0, 2), res.output
        texts.append((out / "binder.csv").read_bytes())
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"] == [3] and manifest["status"] in ("ok", "exit 2")
    assert texts[0] == texts[1]


def test_seed_override_changes_output(runner, tmp_path):
    cfg = _write(tmp_path, SMALL_SCAN)
    a, b = tmp_path / "a", tmp_path / "b"
    runner.invoke(main, ["mc", "--config", str(cfg), "--out", str(a)])
    runner.invoke(main, ["mc", "--config", str(cfg), "--out", str(b), "--seed", "4"])
    assert (a / "binder.csv").read_bytes() != (b / "binder.csv").read_bytes()


def test_command_kind_mismatch(runner, tmp_path):
    cfg = _write(tmp_path, SMALL_SCAN)
    res = runner.invoke(main, ["figure3", "--config", str(cfg)])
    assert res.exit_code != 0 and "kind" in res.output


@pytest.mark.parametrize("patch,msg", [
    ({"kind": "bogus"}, "kind"),
    ({"p_grid": [0.6]}, "invalid error rate"),
    ({"sizes": [128]}, "over budget"),
    ({"lattice": {"N": 1}}, "lattice.N"),
    ({"replica": 1}, "replica"),
    ({"sizes": [4, 6]}, "three sizes"),
    ({"family": "other"}, "family"),
    ({"schedule": {"method": "gibbs"}}, "method"),
    ({"schedule": {"sweeps": 8}}, "32 blocks"),
    ({"colour": "red"}, "unknown keys"),
])
def test_config_validation(patch, msg):
    with pytest.raises(ConfigError, match=msg):
        ExperimentConfig.from_dict({**SMALL_SCAN, **patch})


def test_figure3_loop_must_fit():
    with pytest.raises(ConfigError, match="does not fit"):
        ExperimentConfig.from_dict({"kind": "figure3", "lattice": {"N": 8}, "p_grid": [0.1], "loops": [[8, 2]]})


def test_load_config_overrides(tmp_path):
    cfg = load_config(_write(tmp_path, SMALL_SCAN), {"seed": 9, "out": None})
    assert cfg.seed == 9 and cfg.sizes == [4, 6, 8]
    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: [unclosed")
    with pytest.raises(ConfigError):
        load_config(bad)
