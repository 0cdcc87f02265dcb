"""End-to-end smoke tests for the Python module."""

import json
import math

import pytest

import modesteer as ms


def test_version():
    assert ms.__version__


def test_field_algebra_and_norms():
    cosx = ms.TrigField.cosine(ms.Frequency([1]))
    assert cosx.sobolev_norm(1.0) == pytest.approx(1.0)
    assert ms.TrigField.sine(ms.Frequency([3])).sobolev_norm(2.0) == pytest.approx(
        math.sqrt(50.0)
    )

    sq = cosx @ cosx
    assert sq.cos_coeff(ms.Frequency([0])) == pytest.approx(0.5)
    assert sq.cos_coeff(ms.Frequency([2])) == pytest.approx(0.5)

    cube = cosx.power(3)
    assert cube.cos_coeff(ms.Frequency([1])) == pytest.approx(0.75)
    assert cube.cos_coeff(ms.Frequency([3])) == pytest.approx(0.25)


def test_json_round_trip():
    u = ms.TrigField(1)
    u.add_mode(ms.Frequency([2]), 0.1 + 0.2, 1.0 / 3.0)
    back = ms.TrigField.from_json(u.to_json())
    assert back.cos_coeff(ms.Frequency([2])) == 0.1 + 0.2
    assert back.sin_coeff(ms.Frequency([2])) == 1.0 / 3.0


def test_lattice_operations():
    cross = [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]]
    assert ms.validate_set(2, cross) == "Ok"
    assert ms.is_generator(2, cross)
    assert ms.gcd_determinant(2, cross) == 1

    even = [[0], [2], [-2]]
    assert not ms.is_generator(1, even)
    assert ms.gcd_determinant(1, even) == 2

    grown = ms.grow_once(1, [[0], [1], [-1]], 3, "pairwise")
    assert sorted(grown) == [[-2], [-1], [0], [1], [2]]

    trace = json.loads(ms.saturate(2, cross, 3, 4))
    assert trace["covered"]


def test_resolve_decay():
    nl = ms.NonlinearitySpec.monomial(3, 1.0)
    cfg = ms.SolverConfig()
    cfg.nu = 1.0
    cfg.cutoff = 8
    cfg.dt = 1e-3
    u0 = ms.TrigField.cosine(ms.Frequency([1]), 0.5)
    zero = ms.TrigField(1)
    traj = ms.resolve(u0, zero, zero, zero, 0.5, nl, cfg)
    assert traj.completed
    assert traj.norms[-1] < traj.norms[0]


def test_blowup_detection():
    nl = ms.NonlinearitySpec.monomial(3, -1.0)
    cfg = ms.SolverConfig()
    cfg.cutoff = 2
    cfg.dt = 1e-4
    cfg.blowup_threshold = 1e3
    zero = ms.TrigField(1)
    traj = ms.resolve(ms.TrigField.constant(1, 2.0), zero, zero, zero, 0.2, nl, cfg)
    assert not traj.completed
    assert 0.10 <= traj.t_star <= 0.15


def test_impulse_limit():
    nl = ms.NonlinearitySpec.monomial(3, 1.0)
    cfg = ms.SolverConfig()
    cfg.cutoff = 8
    cfg.dt = 1e-3
    zero = ms.TrigField(1)
    eta = ms.TrigField.sine(ms.Frequency([1]))
    r = ms.impulse(ms.TrigField(1), 1e-4, zero, eta, zero, nl, cfg)
    assert r.error < 1e-2

    study = json.loads(
        ms.limit_study(
            ms.TrigField(1),
            ms.TrigField.cosine(ms.Frequency([1])),
            eta,
            zero,
            nl,
            cfg,
            [1e-2, 1e-3, 1e-4],
        )
    )
    assert study["slope"] > 1.0 / 3.0 - 0.15


def test_plan_small(tmp_path):
    nl = ms.NonlinearitySpec.monomial(3, 1.0)
    planner = {"solver": {"nu": 0.5, "cutoff": 8, "dt": 1e-3}, "k_plan": 2}
    u1 = ms.TrigField.sine(ms.Frequency([2]), 0.3)
    plan_json, report_json, final = ms.plan(
        ms.TrigField(1), u1, 0.2, 0.3, 1, [[0], [1], [-1]], nl, json.dumps(planner)
    )
    report = json.loads(report_json)
    assert report["achieved_error"] < 0.2
    assert (final - u1).sobolev_norm(1.0) == pytest.approx(
        report["achieved_error"], rel=1e-9
    )


def test_scenario_runner(tmp_path):
    sc = {
        "kind": "simulate",
        "name": "smoke",
        "dim": 1,
        "nonlinearity": {"coeffs": [0.0, 0.0, 0.0, 1.0]},
        "solver": {"nu": 1.0, "cutoff": 4, "dt": 1e-3},
        "horizon": 0.1,
    }
    path = tmp_path / "smoke.json"
    path.write_text(json.dumps(sc))
    report = json.loads(ms.run_scenario(str(path), str(tmp_path / "out")))
    assert all(v["pass"] for v in report["verdicts"])
