import math
import os
from pathlib import Path

import numpy as np
import pytest

import plnav

ROOT = Path(os.environ.get("PLNAV_SOURCE_DIR", Path(__file__).resolve().parents[2]))
SCENES = ROOT / "scenes"


def test_reward_terms():
    assert plnav.reward_goal((0.0, 0.0), (1.0, 0.0), (5.0, 0.0)) == pytest.approx(2.5)
    assert plnav.reward_goal((0.0, 0.0), (4.9, 0.0), (5.0, 0.0)) == 15.0
    assert plnav.reward_rotational(1.0) == pytest.approx(-0.1)
    assert plnav.reward_rotational(0.5) == 0.0
    v, w = plnav.denormalize(-1.0, 1.0)
    assert v == 0.0 and w == pytest.approx(math.pi / 2)


def test_scenario_and_sensing():
    s = plnav.load_scenario(SCENES / "water.scene")
    assert s.hazard_count > 0
    pose = s.agent_poses[0]
    depth, mask = plnav.render_camera(s, pose)
    assert depth.shape == (48, 128) and mask.shape == (48, 128)
    assert set(np.unique(mask)) <= {0, 1}
    scan = plnav.perceive(s, pose)
    assert scan.shape == (128,)
    assert np.all(scan > 0) and np.all(scan <= 10.0)
    assert "depth-pool-sem" in plnav.sensing_variants()


def test_pooling_matches_numpy():
    rng = np.random.default_rng(3)
    grid = rng.uniform(0.5, 9.0, size=(16, 40))
    grid[rng.random(grid.shape) < 0.3] = 0.0
    grid[:, 5] = 0.0
    lower = grid[8:]
    expected = np.where(lower > 0, lower, np.inf).min(axis=0)
    expected[np.isinf(expected)] = 10.0
    np.testing.assert_array_equal(plnav.slice_min_pool(grid), expected)
    with pytest.raises(plnav.ShapeError):
        plnav.slice_min_pool(np.zeros(4))


def test_augment_is_seeded():
    ranges = np.linspace(1.0, 5.0, 64)
    a = plnav.augment(ranges, seed=9)
    b = plnav.augment(ranges, seed=9)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, ranges)


def test_environment_steps():
    s = plnav.load_scenario(SCENES / "stage1.scene")
    env = plnav.Environment(s, randomize=True)
    env.reset(seed=4)
    start = env.poses[0]
    rewards, statuses = env.step([(1.0, 0.0)] * len(env.poses))
    assert len(rewards) == len(statuses) == len(env.poses)
    assert env.step_count == 1
    moved = env.poses[0]
    assert math.hypot(moved.x - start.x, moved.y - start.y) == pytest.approx(0.1, abs=1e-9) or statuses[0] != "running"


def test_evaluate_scripted():
    r = plnav.evaluate("zero", SCENES / "stage1.scene", trials=3, seed=1, threads=1)
    assert r["trials"] == 3
    assert r["successes"] == 0
    assert r["timeouts"] + r["collisions"] == 3


def test_cli_usage_error():
    code, _, err = plnav.cli(["eval", "--bogus"])
    assert code == 2
    assert err
