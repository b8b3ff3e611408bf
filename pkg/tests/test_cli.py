import csv
import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from simplexts.cli import main
from simplexts.experiments import StudyConfig
from simplexts.models import simulate, spec_from_dict, spec_to_dict

BIRD_A1 = [[2.82, 1.66], [0.68, 3.45]]


def _config(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def sim_dir(tmp_path, study_spec):
    cfg = _config(tmp_path / "sim.json", {"spec": spec_to_dict(study_spec), "n": 100, "seed": 4,
                                          "burn_in": 200, "species": ["a", "b", "c"]})
    assert main(["simulate", "--config", cfg]) == 0
    return tmp_path


def test_simulate_writes_compositions(sim_dir):
    rows = _read_csv(sim_dir / "simulated.csv")
    assert rows[0] == ["t", "a", "b", "c"]
    y = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert y.shape == (100, 3)
    assert np.allclose(y.sum(axis=1), 1.0, atol=1e-12)
    run = json.loads((sim_dir / "simulate_run.json").read_text())
    assert run["seed"] == 4 and run["command"] == "simulate"
    assert run["outputs"] == [str(sim_dir / "simulated.csv")]


def test_simulate_is_reproducible(sim_dir, tmp_path_factory):
    other = tmp_path_factory.mktemp("again")
    cfg = str(sim_dir / "sim.json")
    assert main(["simulate", "--config", cfg, "--out", str(other)]) == 0
    assert (other / "simulated.csv").read_bytes() == (sim_dir / "simulated.csv").read_bytes()
    third = tmp_path_factory.mktemp("seed")
    assert main(["simulate", "--config", cfg, "--out", str(third), "--seed", "5"]) == 0
    assert (third / "simulated.csv").read_bytes() != (sim_dir / "simulated.csv").read_bytes()


def test_missing_spec_file(tmp_path, capsys):
    cfg = _config(tmp_path / "sim.json", {"spec": "nowhere/spec.json", "n": 10})
    assert main(["simulate", "--config", cfg]) != 0
    assert "nowhere/spec.json" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "absent.json")]) == 1
    assert "absent.json" in capsys.readouterr().err


def test_bad_seed(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "x.json"), "--seed", "-1"]) == 2


def test_fit_full_model(sim_dir):
    cfg = _config(sim_dir / "fit.json.cfg", {"data": "simulated.csv", "method": "dirichlet_mle"})
    assert main(["fit", "--config", cfg]) == 0
    doc = json.loads((sim_dir / "fit.json").read_text())
    assert len(doc["params"]) == 8
    assert doc["pipeline"] == ["convex", "dirichlet_mle"]
    assert doc["species"] == ["a", "b", "c"]
    assert doc["n_observations"] == 100
    assert doc["stationarity"]["satisfied"] is True
    assert doc["spec"]["family"] == "dirichlet"


def test_fit_convex_mean_block_only(sim_dir):
    cfg = _config(sim_dir / "cvx.json", {"data": "simulated.csv", "method": "convex", "output": "cvx_fit.json"})
    assert main(["fit", "--config", cfg]) == 0
    doc = json.loads((sim_dir / "cvx_fit.json").read_text())
    assert list(doc["params"]) == ["A0[1]", "A0[2]", "A1[1,1]", "A1[1,2]", "A1[2,1]", "A1[2,2]"]
    assert doc["spec"] is None


def test_fit_bootstrap_block(sim_dir):
    cfg = _config(sim_dir / "boot.json", {"data": "simulated.csv", "bootstrap_reps": 3, "burn_in": 50,
                                          "output": "boot_fit.json", "fixed": {"a1": 0.0}})
    assert main(["fit", "--config", cfg]) == 0
    doc = json.loads((sim_dir / "boot_fit.json").read_text())
    assert doc["bootstrap"]["reps"] == 3
    assert set(doc["se"]) == set(doc["params"])


def test_forecast_schema(sim_dir, study_spec):
    cfg = _config(sim_dir / "fc.json", {"spec": spec_to_dict(study_spec), "data": "simulated.csv",
                                        "history_length": 95, "horizon": 8, "reps": 500})
    assert main(["forecast", "--config", cfg]) == 0
    rows = _read_csv(sim_dir / "forecast.csv")
    assert rows[0] == ["step", "species", "real", "predicted", "q2.5", "q97.5"]
    assert len(rows) == 1 + 8 * 3
    assert rows[1][0] == "1" and rows[1][1] == "a" and rows[1][2] != ""
    assert rows[-1][2] == ""  # beyond the observed data
    doc = json.loads((sim_dir / "forecast.json").read_text())
    assert doc["history_end"] == 95 and len(doc["mean"]) == 8 and len(doc["real"]) == 5


def test_forecast_from_fit_output(sim_dir):
    fit_cfg = _config(sim_dir / "f.json", {"data": "simulated.csv"})
    assert main(["fit", "--config", fit_cfg]) == 0
    cfg = _config(sim_dir / "fc2.json", {"spec": "fit.json", "data": "simulated.csv", "horizon": 2,
                                         "reps": 200, "output": "fc2"})
    assert main(["forecast", "--config", cfg]) == 0
    assert (sim_dir / "fc2.csv").exists()


def test_perturb_bird_line(tmp_path):
    cfg = _config(tmp_path / "p.json", {"A1": BIRD_A1, "i": 1, "j": 2, "p": 0.1})
    assert main(["perturb", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "perturb.json").read_text())
    assert doc["slope"] == pytest.approx(-3.93, abs=0.005)
    assert doc["intercept"] == pytest.approx(1.79, abs=0.005)
    rows = _read_csv(tmp_path / "perturb_sweep.csv")
    assert rows[0] == ["c", "log_ratio", "ratio"] and len(rows) == 102
    for c, lr, _ in rows[1:]:
        assert float(lr) == pytest.approx(0.1 * (-3.93 * float(c) + 1.78), abs=0.02 * 0.1)


def test_perturb_multistep(sim_dir, study_spec):
    cfg = _config(sim_dir / "pm.json", {"spec": spec_to_dict(study_spec), "data": "simulated.csv",
                                        "i": 1, "j": 2, "p": 0.05,
                                        "multistep": {"k": 1, "ell": 2, "reps": 500, "c": 0.3}})
    assert main(["perturb", "--config", cfg]) == 0
    doc = json.loads((sim_dir / "perturb.json").read_text())
    assert doc["multistep"]["ell"] == 2 and doc["multistep"]["se"] > 0


def test_perturb_rejects_reference_index(tmp_path, capsys):
    cfg = _config(tmp_path / "p.json", {"A1": BIRD_A1, "i": 1, "j": 3})
    assert main(["perturb", "--config", cfg]) == 1
    assert "out of range" in capsys.readouterr().err


def test_study_command(tmp_path, study_spec):
    cfg = _config(tmp_path / "s.json", {"true_spec": spec_to_dict(study_spec), "sample_sizes": [80],
                                        "replications": 3, "estimators": ["convex"], "burn_in": 50,
                                        "seed": 2})
    assert main(["study", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "study.json").read_text())
    assert doc["config"]["master_seed"] == 2
    assert doc["cells"][0]["converged"] == 3
    assert (tmp_path / "study_run.json").exists()
    assert _read_csv(tmp_path / "study.csv")[0][:4] == ["estimator", "n", "converged", "failed"]


def test_bad_study_key(tmp_path, study_spec, capsys):
    cfg = _config(tmp_path / "s.json", {"true_spec": spec_to_dict(study_spec), "sample_sizes": [80],
                                        "replications": 3, "colour": "red"})
    assert main(["study", "--config", cfg]) == 1
    assert "invalid study config" in capsys.readouterr().err


def test_failed_run_leaves_no_partial_files(tmp_path):
    cfg = _config(tmp_path / "p.json", {"A1": BIRD_A1, "i": 1, "j": 2, "p": -1})
    assert main(["perturb", "--config", cfg]) == 1
    assert sorted(p.name for p in tmp_path.iterdir()) == ["p.json"]


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "simplexts.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "simplexts" in out.stdout


CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_checked_in_study_configs_match_the_acceptance_design(study_spec):
    full = json.loads((CONFIGS / "study_table1.json").read_text())
    spec = json.loads((CONFIGS / full["true_spec"]).read_text())
    assert spec_to_dict(spec_from_dict(spec)) == spec_to_dict(study_spec)
    assert full["sample_sizes"] == [100, 500] and full["replications"] == 200
    phi = json.loads((CONFIGS / "study_table1_fixed_phi.json").read_text())
    assert phi["fixed"] == {"a0": math.log(2.0), "a1": 0.0}
    assert StudyConfig.from_dict(phi).estimators == [
        "dirichlet_mle", "convex"]


def test_example_config_chain(tmp_path):
    for f in CONFIGS.glob("*.json"):
        shutil.copy(f, tmp_path)
    for cmd, cfg in (("simulate", "simulate"), ("fit", "fit"), ("forecast", "forecast"),
                     ("perturb", "perturb_bird")):
        args = [cmd, "--config", str(tmp_path / f"{cfg}.json")]
        if cmd == "fit":
            args += ["--threads", "1"]
        assert main(args) == 0, cmd
    assert (tmp_path / "forecast.csv").exists()


@pytest.mark.slow
def test_refit_recovers_fitted_spec_within_bootstrap_se(tmp_path, study_spec):
    data = simulate(study_spec, 2000, rng=31)
    with open(tmp_path / "d.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "a", "b", "c"])
        for t, row in enumerate(data):
            w.writerow([t, *row])
    cfg = _config(tmp_path / "fit.cfg", {"data": "d.csv", "bootstrap_reps": 20, "burn_in": 200, "seed": 3})
    assert main(["fit", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "fit.json").read_text())
    truth = dict(zip(study_spec.param_names(), study_spec.to_vector()))
    z = {k: abs(doc["params"][k] - truth[k]) / doc["se"][k] for k in truth}
    assert max(z.values()) < 3.5, z
