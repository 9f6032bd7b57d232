import math

import numpy as np
import pytest

import dynrcm

STATIC = {"kind": "static", "conductance": 1.0}
DP = {"kind": "dynamical_percolation", "p": 0.5, "mu": 1.0}


def test_lattice_counts():
    lat = dynrcm.Lattice.torus(2, 5)
    assert lat.num_vertices == 25
    assert lat.num_edges == 50
    assert lat.vertex(lat.vertex_id([3, 4])) == [3, 4]
    assert dynrcm.Lattice.box(2, 3).num_vertices == 25


def test_two_state_kernel_closed_form():
    lat = dynrcm.Lattice.torus(1, 2)
    traj = dynrcm.sample_environment(STATIC, lat, (0.0, 1.0), seed=1)
    p, bound = dynrcm.transition_kernel(traj, 0.0, 1.0)
    assert isinstance(p, np.ndarray)
    assert p[0, 1] == pytest.approx((1 - math.exp(-2.0)) / 2, abs=1e-12)
    assert bound < 1e-10


def test_kernel_reversal_identity():
    lat = dynrcm.Lattice.torus(2, 4)
    traj = dynrcm.sample_environment(DP, lat, (0.0, 3.0), seed=7)
    fwd, _ = dynrcm.transition_kernel(traj, 0.5, 2.5)
    bwd, _ = dynrcm.transition_kernel(traj, 2.5, 0.5)
    assert np.abs(fwd - bwd.T).max() <= 1e-9
    assert np.allclose(fwd.sum(axis=1), 1.0)


def test_trajectory_round_trip():
    lat = dynrcm.Lattice.torus(2, 3)
    traj = dynrcm.sample_environment(DP, lat, (0.0, 2.0), seed=3)
    back = dynrcm.Trajectory.from_dict(traj.to_dict())
    assert back.to_dict() == traj.to_dict()
    assert back.reversed().window == (-2.0, 0.0)


def test_norms_and_bounds():
    assert dynrcm.infinitesimal_norm(DP, 2, 2) == pytest.approx(math.sqrt(5))
    assert dynrcm.stirling2(4, 2) == 7
    assert dynrcm.moment_bound(2, 1.0, STATIC, 2) == pytest.approx(36.0)
    assert dynrcm.moment_bound(2, 1.0, DP, 2) == pytest.approx(12.0)


def test_moment_check_report():
    lat = dynrcm.Lattice.box(2, 10)
    r = dynrcm.check_moment_bound(STATIC, lat, p=1, b=1.0, replicas=2000, seed=5)
    assert r["verdict"] == "pass"
    assert abs(r["empirical_value"] - 4.0) <= 4 * r["standard_error"]


def test_walk_and_backward_sum():
    lat = dynrcm.Lattice.torus(2, 8)
    traj = dynrcm.sample_environment(STATIC, lat, (-5.0, 5.0), seed=2)
    walk = dynrcm.sample_walk(traj, [0, 0], 0.0, seed=4)
    assert walk["lattice"]["side_length"] == 8
    sums = dynrcm.backward_collision_sum(traj, [0, 0], 5)
    assert len(sums) == 5
    assert all(b > a for a, b in zip(sums, sums[1:]))


def test_voter_duality():
    lat = dynrcm.Lattice.torus(2, 4)
    r = dynrcm.duality_check(STATIC, lat, [0, 0], 1.0, replicas=2000, seed=9)
    assert r["verdict"] == "pass"


def test_config_validation_and_run():
    cfg = {
        "experiment": "kernel",
        "lattice": {"dimension": 2, "mode": "torus", "side_length": 4},
        "environment": DP,
        "window": {"start": 0.0, "end": 2.0},
        "replicas": 3,
        "master_seed": 1,
    }
    out = dynrcm.run_experiment(cfg)
    assert out["passed"]
    names = [r["name"] for r in out["reports"]]
    assert "detailed_balance" in names
    assert dynrcm.run_experiment(cfg)["reports"] == out["reports"]
    bad = dict(cfg, replicas=0)
    with pytest.raises(dynrcm.ConfigError):
        dynrcm.validate_config(bad)
    with pytest.raises(ValueError):
        dynrcm.validate_config(dict(cfg, surprise=1))
