"""Config validation, scenario execution and the CLI."""

import json

import pytest

from sdelab import ConfigError, SCENARIOS, emit_plotdata, run_scenario, validate_config
from sdelab.runner import main


def test_scenario_catalogue_is_complete():
    assert set(SCENARIOS) == {
        "thm_multidim_convergence",
        "thm_1d_convergence",
        "elliptic_energy",
        "stationary_1d",
        "kinetic_langevin",
        "ae_uniqueness_map",
        "norm_audit",
    }


def test_validate_applies_defaults():
    cfg = validate_config({"scenario": "stationary_1d"})
    assert cfg["C"] == 0.5
    assert cfg["seed"] == 0
    assert cfg["grid"]["counts"] == [1024]


def test_validate_rejects_unknown_scenario():
    with pytest.raises(ConfigError):
        validate_config({"scenario": "frobnicate"})
    with pytest.raises(ConfigError):
        validate_config("not a dict")


def test_validate_collects_all_errors_at_once():
    with pytest.raises(ConfigError) as exc:
        validate_config({
            "scenario": "thm_1d_convergence",
            "n_paths": -5,
            "T": 0.0,
            "deltas": [0.1, 0.2],
            "bogus_key": 1,
        })
    msgs = exc.value.errors
    assert len(msgs) >= 4
    assert any("n_paths" in m for m in msgs)
    assert any("T" in m for m in msgs)
    assert any("deltas" in m for m in msgs)
    assert any("bogus_key" in m for m in msgs)


def test_validate_rejects_p_at_most_d():
    with pytest.raises(ConfigError) as exc:
        validate_config({"scenario": "elliptic_energy", "p": 1.0})
    assert any("p:" in m for m in exc.value.errors)


def test_validate_norm_audit_needs_periodic_power_of_two():
    with pytest.raises(ConfigError):
        validate_config({
            "scenario": "norm_audit",
            "grid": {"bounds": [[-4.0, 4.0]], "counts": [1000],
                     "periodic": True},
        })
    with pytest.raises(ConfigError):
        validate_config({
            "scenario": "norm_audit",
            "grid": {"bounds": [[-4.0, 4.0]], "counts": [1024],
                     "periodic": False},
        })


def test_run_scenario_emits_manifest_and_checks(tmp_path):
    art = run_scenario({"scenario": "elliptic_energy"}, out_dir=tmp_path / "run")
    assert art.passed
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["complete"]
    assert manifest["checks"]["energy"] is True
    for rel in manifest["files"]:
        assert (tmp_path / "run" / rel).exists()
    series = emit_plotdata(art)
    assert series and all(str(p).endswith(".csv") for p in series)


def test_run_scenario_seed_override_changes_hash(tmp_path):
    a = run_scenario({"scenario": "elliptic_energy"}, out_dir=tmp_path / "a")
    b = run_scenario({"scenario": "elliptic_energy"}, out_dir=tmp_path / "b",
                     seed=99)
    assert a.manifest["config_hash"] != b.manifest["config_hash"]


def test_run_scenario_rerun_is_bit_identical(tmp_path):
    cfg = {"scenario": "norm_audit"}
    a = run_scenario(cfg, out_dir=tmp_path / "a")
    b = run_scenario(cfg, out_dir=tmp_path / "b")
    assert a.manifest["files"] == b.manifest["files"]
    for rel in a.manifest["files"]:
        assert (tmp_path / "a" / rel).read_bytes() == \
            (tmp_path / "b" / rel).read_bytes()


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in SCENARIOS:
        assert name in out


def test_cli_validate(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"scenario": "stationary_1d"}))
    assert main(["validate", str(good)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "stationary_1d", "C": -1}))
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_cli_run(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "stationary_1d"}))
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    assert (out / "manifest.json").exists()
    assert "pass" in capsys.readouterr().out
