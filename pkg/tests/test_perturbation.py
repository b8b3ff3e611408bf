import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simplexts.models import DirichletODSpec, filter_path, simulate
from simplexts.perturbation import (
    delta_lr,
    emr,
    equilibrium_c,
    lag_matrix,
    means_ratio_log,
    multistep_perturbation_ratio,
    perturbation_line,
    perturbation_report,
)
from simplexts.simplex import build_perturbation

STUDY_A1 = [[4.0, 3.0], [3.0, 5.0]]

finite = st.floats(-5, 5, allow_nan=False, width=64)


def _zero_sum(v):
    v = np.asarray(v, dtype=float)
    return v - v.mean()


@given(arrays(float, (3, 3), elements=finite), arrays(float, 4, elements=finite))
def test_delta_lr_antisymmetric(A, g):
    g = _zero_sum(g)
    assert delta_lr(A, 0, 2, g) == pytest.approx(-delta_lr(A, 2, 0, g), abs=1e-9)
    assert delta_lr(A, 1, 3, g) == pytest.approx(-delta_lr(A, 3, 1, g), abs=1e-9)


@given(arrays(float, (2, 2), elements=finite), arrays(float, 3, elements=finite),
       arrays(float, 3, elements=finite), st.floats(-3, 3))
def test_delta_lr_linear(A, g1, g2, s):
    g1, g2 = _zero_sum(g1), _zero_sum(g2)
    lhs = delta_lr(A, 0, 1, g1 + s * g2)
    rhs = delta_lr(A, 0, 1, g1) + s * delta_lr(A, 0, 1, g2)
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_zero_perturbation_gives_one():
    assert emr(STUDY_A1, 0, 1, np.zeros(3)) == 1.0


def test_reference_row_is_zero():
    A = np.array(STUDY_A1)
    g = np.array([0.1, -0.3, 0.2])
    assert delta_lr(A, 0, 2, g) == pytest.approx(A[0] @ g[:2])


def test_gamma_checks():
    with pytest.raises(ValueError, match="sum to zero"):
        delta_lr(STUDY_A1, 0, 1, [0.1, 0.1, 0.1])
    with pytest.raises(ValueError, match="length"):
        delta_lr(STUDY_A1, 0, 1, [0.1, -0.1])
    with pytest.raises(IndexError):
        delta_lr(STUDY_A1, 0, 3, [0.1, -0.1, 0.0])


@given(arrays(float, (2, 2), elements=finite), st.floats(0, 1), st.floats(0.01, 0.5))
def test_line_reproduces_exponent(A, c, p):
    slope, intercept = perturbation_line(A, 0, 1)
    g = build_perturbation(3, 0, 1, c, p)
    assert delta_lr(A, 0, 1, g) == pytest.approx(p * (slope * c + intercept), abs=1e-9)


def test_line_on_grid_matches_emr():
    rep = perturbation_report(STUDY_A1, 0, 1, 0.1)
    for c in np.linspace(0, 1, 20):
        g = build_perturbation(3, 0, 1, c, 0.1)
        assert np.exp(rep.log_ratio(c)) == pytest.approx(emr(STUDY_A1, 0, 1, g), rel=1e-12)


def test_symmetric_matrix_balances_at_half():
    A = [[2.0, 0.5], [0.5, 2.0]]
    assert equilibrium_c(A, 0, 1) == pytest.approx(0.5)
    assert perturbation_report(A, 0, 1, 0.1).status == "root"


def test_identically_balanced():
    A = [[1.0, 1.0], [1.0, 1.0]]
    rep = perturbation_report(A, 0, 1, 0.1)
    assert rep.status == "identically balanced"
    assert rep.equilibrium_c is None
    assert all(row["ratio"] == 1.0 for row in rep.sweep())


def test_no_root():
    # slope 1, intercept 1: the ratio is balanced only at c = -1
    rep = perturbation_report([[0.0, 0.0], [2.0, 1.0]], 0, 1, 0.1)
    assert rep.status == "no root in [0,1]"
    assert rep.equilibrium_c is None
    assert equilibrium_c([[0.0, 1.0], [0.0, 0.0]], 0, 1) == pytest.approx(1.0)


def test_study_matrix_line_values():
    slope, intercept = perturbation_line(STUDY_A1, 0, 1)
    assert slope == pytest.approx(-3.0, abs=1e-12)
    assert intercept == pytest.approx(2.0, abs=1e-12)
    assert equilibrium_c(STUDY_A1, 0, 1) == pytest.approx(2.0 / 3.0)


def test_sweep_outputs(tmp_path):
    rep = perturbation_report(STUDY_A1, 0, 1, 0.1)
    rows = rep.sweep()
    assert len(rows) == 101
    assert rows[0]["c"] == 0.0 and rows[-1]["c"] == 1.0
    path = tmp_path / "sweep.csv"
    rep.write_sweep_csv(path)
    with path.open() as fh:
        got = list(csv.DictReader(fh))
    assert len(got) == 101
    assert float(got[50]["log_ratio"]) == rows[50]["log_ratio"]
    assert json.loads(rep.to_json())["status"] == "root"


def test_report_rejects_nonpositive_p():
    with pytest.raises(ValueError):
        perturbation_report(STUDY_A1, 0, 1, 0.0)


def test_lag_matrix(study_spec, od_spec):
    assert np.array_equal(lag_matrix(study_spec), np.array(STUDY_A1))
    assert np.array_equal(lag_matrix(od_spec), np.asarray(od_spec.A))
    with pytest.raises(ValueError):
        lag_matrix(study_spec, 2)
    with pytest.raises(ValueError):
        lag_matrix(od_spec, 2)


def test_means_ratio_log(study_spec, rng):
    y = simulate(study_spec, 20, rng=rng)
    latent = filter_path(study_spec, y)
    mu = latent.mu_next
    assert means_ratio_log(study_spec, 0, 1, latent) == pytest.approx(mu[0] - mu[1])
    assert means_ratio_log(study_spec, 1, 2, latent) == pytest.approx(mu[1])
    assert means_ratio_log(study_spec, 2, 0, latent, t=3) == pytest.approx(-latent.mu[3][0])
    with pytest.raises(ValueError):
        means_ratio_log(study_spec, 1, 1, latent)


# -- simulated ratio --------------------------------------------------------------

@pytest.fixture
def history(study_spec):
    return simulate(study_spec, 30, rng=3)


def test_multistep_zero_gamma_is_exactly_one(study_spec, history):
    r = multistep_perturbation_ratio(study_spec, history, 2, np.zeros(3), 3, 0, 1, reps=500, rng=1)
    assert r.ratio == 1.0
    assert r.log_ratio == 0.0


def test_multistep_swap_gives_reciprocal(study_spec, history):
    g = build_perturbation(3, 0, 1, 0.3, 0.05)
    a = multistep_perturbation_ratio(study_spec, history, 1, g, 2, 0, 1, reps=2000, rng=5)
    b = multistep_perturbation_ratio(study_spec, history, 1, g, 2, 1, 0, reps=2000, rng=5)
    assert a.ratio * b.ratio == pytest.approx(1.0, rel=1e-12)


def test_multistep_one_step_matches_emr(study_spec, history):
    g = build_perturbation(3, 0, 1, 0.2, 0.05)
    r = multistep_perturbation_ratio(study_spec, history, 1, g, 1, 0, 1, reps=40000, rng=9)
    target = emr(STUDY_A1, 0, 1, g)
    assert abs(r.ratio - target) < 4 * r.se
    assert r.se > 0


def test_multistep_effect_fades(study_spec, history):
    g = build_perturbation(3, 0, 1, 0.2, 0.1)
    far = multistep_perturbation_ratio(study_spec, history, 1, g, 30, 0, 1, reps=20000, rng=2)
    near = multistep_perturbation_ratio(study_spec, history, 1, g, 1, 0, 1, reps=20000, rng=2)
    assert abs(far.log_ratio) < abs(near.log_ratio)
    assert abs(far.ratio - 1.0) < 4 * far.se + 0.02


def test_multistep_validation(study_spec, history):
    with pytest.raises(ValueError):
        multistep_perturbation_ratio(study_spec, history, 0, np.zeros(3), 1, 0, 1)
    with pytest.raises(ValueError):
        multistep_perturbation_ratio(study_spec, history, 1, np.zeros(3), 0, 0, 1)
    with pytest.raises(ValueError):
        multistep_perturbation_ratio(study_spec, history, 1, np.zeros(3), 1, 0, 1, reps=1)
    unstable = DirichletODSpec([0, 0], STUDY_A1, np.zeros((2, 2)), 0.0, 0.5, 1.01)
    with pytest.raises(ValueError):
        multistep_perturbation_ratio(unstable, history, 1, np.zeros(3), 1, 0, 1)
