import numpy as np
import pytest

import gdg


def tiny(method, episodes=8):
    return gdg.config(
        "city-desk",
        method=method,
        episodes=episodes,
        horizon=30,
        eval_every=4,
        eval_tasks=4,
        eval_budget=40,
        batch_size=32,
        bucket_distances=[],
        gdg={"hidden": [16, 16]},
        ddpg={"hidden": [16, 16]},
    )


def test_presets_round_trip():
    assert "city-desk" in gdg.preset_names()
    cfg = gdg.preset("trap")
    assert cfg["env"] == "trap"
    assert gdg.config("trap") == cfg


def test_bad_config_raises():
    with pytest.raises(ValueError):
        gdg.config("city-desk", eps_bridge=3.0)
    with pytest.raises(ValueError):
        gdg.preset("nowhere")


def test_map_calibration():
    assert 110 <= gdg.make_env("four_rooms").diameter() <= 130
    assert 220 <= gdg.make_env("city").diameter() <= 260
    trap = gdg.make_env("trap")
    start, goal = trap.fixed_task
    assert trap.bfs_distance(start, trap.trap_point) <= 10
    assert trap.bfs_distance(start, goal) >= 80


def test_step_respects_walls_and_goal():
    env = gdg.make_env("four_rooms")
    start, goal = env.reset(3)
    assert env.is_free(start)
    pos = np.asarray(start)
    for _ in range(200):
        pos, reached = env.step(pos, goal, np.array([1.0, 1.0]))
        assert env.is_free(pos)
    _, reached = env.step(goal, goal, np.zeros(2))
    assert reached


def test_train_is_deterministic_and_reports():
    cfg = tiny("gdg_bridge")
    a, b = gdg.train(cfg), gdg.train(cfg)
    assert a.curves_csv() == b.curves_csv()
    assert a.checkpoint_sha1() == b.checkpoint_sha1()
    rep = gdg.report(a)
    assert rep["aborted"] == ""
    assert [p["episodes"] for p in rep["curve"]] == [0, 4, 8]
    assert rep["telemetry"]["episodes"] == 8


def test_evaluate_does_not_mutate_and_distance_is_nonnegative():
    session = gdg.train(tiny("gdg"))
    env = gdg.make_env("city_desk")
    before = session.checkpoint_sha1()
    tasks = [env.reset(s) for s in range(5)]
    result = session.evaluate(tasks, budget=30, use_bridge=True)
    assert len(result["outcomes"]) == 5
    assert session.checkpoint_sha1() == before
    d = session.distances([t[0] for t in tasks], [t[1] for t in tasks])
    assert all(x >= 0 for x in d)
    start = tasks[0][0]
    assert session.evaluate([(start, start)])["outcomes"][0]["steps"] == 0


def test_random_policy_has_no_distance():
    session = gdg.untrained(tiny("random"))
    with pytest.raises(ValueError):
        session.distances([np.zeros(2)], [np.zeros(2)])


def test_her_relabel_goals_come_from_future():
    env = gdg.make_env("four_rooms")
    start, goal = env.reset(1)
    rng = np.random.default_rng(0)
    states, actions = [np.asarray(start)], []
    for _ in range(50):
        a = rng.uniform(-1, 1, size=2)
        nxt, _ = env.step(states[-1], goal, a)
        actions.append(a)
        states.append(np.asarray(nxt))
    out = gdg.her_relabel(env, states, actions, goal, 4, 7)
    assert len(out) == 250
    for i, t in enumerate(out):
        step = i // 5
        if i % 5:
            assert any(np.array_equal(t["g"], s) for s in states[step + 1 :])


def test_git_blob_sha1():
    assert gdg.git_blob_sha1(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"
