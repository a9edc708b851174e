import json
import math

import pytest

import imdial


def test_environment_round_trip():
    env = imdial.Environment()
    state = env.reset(7)
    assert len(state) == env.state_dim == 251
    assert env.action_dim == 63
    assert env.opening()
    s, r, done, success, system, user = env.step([("bye", "", "", "")])
    assert len(s) == 251
    assert r == -1.0 or done
    assert ("bye", "", "", "") in system


def test_bad_act_raises():
    env = imdial.Environment()
    env.reset(1)
    with pytest.raises(imdial.ImdialError):
        env.step([("offer", "spaceport", "", "")])


def test_scripted_policies():
    env = imdial.Environment()
    assert env.analyze("oracle", 50, seed=3)["success_rate"] == 1.0
    assert env.analyze("empty", 50, seed=3)["success_rate"] == 0.0
    with pytest.raises(imdial.ImdialError):
        env.analyze("nope", 5)


def test_gae_and_surrogate():
    adv, targets = imdial.compute_gae([1.0, 1.0], [0.5, 0.5], 0.99, 0.95)
    assert adv[0] == pytest.approx(1.46525, abs=1e-12)
    assert targets[1] == pytest.approx(1.0)
    loss = imdial.clipped_surrogate_loss([math.log(1.5)], [0.0], [1.0], 0.1)
    assert loss == pytest.approx(-1.1)


def test_metrics_example():
    outcomes = [(True, True, True, True), (True, False, True, False),
                (False, False, True, True), (True, True, False, False),
                (True, False, True, True)]
    m = imdial.compute_metrics(outcomes)
    assert m["n_dialogues"] == 5
    assert m["complete_rate"] == pytest.approx(0.8)
    assert m["book_rate"] == pytest.approx(0.75)


def test_trainer_is_deterministic():
    cfg = json.dumps({"arm": "ppo", "total_steps": 64, "eval_interval": 32,
                      "n_eval": 5, "seed": 1})
    a, b = imdial.Trainer(cfg), imdial.Trainer(cfg)
    a.run()
    b.run()
    assert a.csv_text() == b.csv_text()
    assert a.csv_text().count("\n") == 3
    assert a.step_count >= 64
    assert "ppo" in imdial.arms()
