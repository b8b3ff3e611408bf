import csv
import json

import numpy as np
import pytest

from simplexts import experiments
from simplexts.estimation import EstimationError
from simplexts.experiments import (
    StudyConfig,
    StudyResult,
    batch_means_se,
    default_inits,
    run_ergodicity_check,
    run_rmse_study,
)
from simplexts.models import DirichletODSpec, StationarityError


def _config(spec, **kw):
    base = dict(true_spec=spec, sample_sizes=[150, 600], replications=8, estimators=["convex"],
                master_seed=3, burn_in=100)
    base.update(kw)
    return StudyConfig(**base)


def test_config_guards(study_spec, ln_finite_spec):
    with pytest.raises(ValueError, match="replications"):
        _config(study_spec, replications=0)
    with pytest.raises(ValueError):
        _config(study_spec, sample_sizes=[])
    with pytest.raises(ValueError, match="does not apply"):
        _config(study_spec, estimators=["ln_ls"])
    with pytest.raises(ValueError, match="does not apply"):
        _config(ln_finite_spec, estimators=["dirichlet_mle"])
    with pytest.raises(ValueError):
        _config(study_spec, estimators=["ridge"])


def test_config_round_trip(study_spec):
    cfg = _config(study_spec, fixed={"a1": 0.0})
    doc = json.loads(json.dumps(cfg.to_dict()))
    back = StudyConfig.from_dict(doc)
    assert back.to_dict() == cfg.to_dict()


def test_study_is_reproducible(study_spec):
    a = run_rmse_study(_config(study_spec))
    b = run_rmse_study(_config(study_spec))
    c = run_rmse_study(_config(study_spec), workers=2)
    d = run_rmse_study(_config(study_spec, master_seed=4))
    assert a.to_dict() == b.to_dict() == c.to_dict()
    assert a.to_dict() != d.to_dict()


def test_study_rmse_shrinks(study_spec):
    res = run_rmse_study(_config(study_spec, replications=12))
    names = study_spec.param_names()[:6]
    small = np.array([res.rmse(150, "convex", k) for k in names])
    large = np.array([res.rmse(600, "convex", k) for k in names])
    assert np.mean(large / small) < 0.8
    cell = res.cell(600, "convex")
    assert cell.converged == 12 and cell.failed == 0 and not cell.aborted


def test_fixed_parameters_are_not_reported(study_spec):
    fixed = {"a0": float(np.log(2.0)), "a1": 0.0}
    cfg = _config(study_spec, sample_sizes=[200], replications=3, estimators=["dirichlet_mle"], fixed=fixed)
    res = run_rmse_study(cfg)
    assert set(res.cell(200, "dirichlet_mle").rmse) == set(study_spec.param_names()[:6])


def test_failures_abort_cell(study_spec, monkeypatch):
    calls = {"n": 0}
    real_fit = experiments._fit

    def flaky(method, data, spec, fixed):
        calls["n"] += 1
        if calls["n"] % 2 == 0:
            raise EstimationError("boom")
        return real_fit(method, data, spec, fixed)

    monkeypatch.setattr(experiments, "_fit", flaky)
    res = run_rmse_study(_config(study_spec, sample_sizes=[100], replications=6))
    cell = res.cell(100, "convex")
    assert cell.aborted and cell.failed == 3 and cell.rmse == {}


def test_study_outputs(study_spec, tmp_path):
    res = run_rmse_study(_config(study_spec, sample_sizes=[100], replications=3))
    path = tmp_path / "study.csv"
    res.write_csv(path)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["estimator"] == "convex" and rows[0]["n"] == "100"
    assert float(rows[0]["A0[1]"]) == res.rmse(100, "convex", "A0[1]")
    assert json.loads(res.to_json())["cells"][0]["converged"] == 3
    with pytest.raises(KeyError):
        res.cell(999, "convex")


def test_study_rejects_nonstationary_truth():
    unstable = DirichletODSpec([0, 0], np.eye(2), np.zeros((2, 2)), 0.0, 0.5, 1.01)
    with pytest.raises(StationarityError):
        run_rmse_study(StudyConfig(unstable, [50], replications=2))


# -- ergodicity -------------------------------------------------------------------

def test_batch_means_matches_iid_se(rng):
    x = rng.normal(size=100000)
    assert batch_means_se(x) == pytest.approx(1 / np.sqrt(x.size), rel=0.3)
    with pytest.raises(ValueError):
        batch_means_se(np.arange(10.0))


def test_batch_means_inflates_for_correlated_series(rng):
    e = rng.normal(size=100000)
    x = np.empty_like(e)
    x[0] = e[0]
    for t in range(1, e.size):
        x[t] = 0.9 * x[t - 1] + e[t]
    naive = x.std() / np.sqrt(x.size)
    # AR(1): long-run sd is sd / sqrt((1 - rho) / (1 + rho)) ~ 4.36 times larger
    assert batch_means_se(x) / naive == pytest.approx(np.sqrt(19), rel=0.3)


def test_nonstationary_rejected():
    unstable = DirichletODSpec([0, 0], np.eye(2), np.zeros((2, 2)), 0.0, 0.5, 1.01)
    with pytest.raises(StationarityError):
        run_ergodicity_check(unstable, n=1000)


def test_identical_chains_have_zero_difference(study_spec):
    rep = run_ergodicity_check(study_spec, n=2000, seeds=(5, 5), inits=[{}, {}])
    assert rep.max_abs_difference == 0.0
    assert np.all(rep.z == 0.0) and rep.passed
    assert rep.statistics == ["h1[1]", "h1[2]", "entropy"]


def test_different_starts_agree(od_spec):
    rep = run_ergodicity_check(od_spec, n=20000)
    assert rep.means.shape == rep.se.shape == (2, 3)
    assert rep.passed, rep.z


def test_default_inits_are_distinct(study_spec):
    a, b = default_inits(study_spec)
    assert a == {} and b["composition"][0] == 0.95
    assert b["composition"].sum() == pytest.approx(1.0)


def test_seed_count_checked(study_spec):
    with pytest.raises(ValueError):
        run_ergodicity_check(study_spec, n=1000, seeds=(1, 2, 3))


def test_result_type(study_spec):
    res = run_rmse_study(_config(study_spec, sample_sizes=[80], replications=2))
    assert isinstance(res, StudyResult)
