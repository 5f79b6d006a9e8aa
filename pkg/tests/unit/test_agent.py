from __future__ import annotations

from typing import Dict

import numpy as np
import pytest

from plasticity_lab.agent import Agent, AgentConfig
from plasticity_lab.numerics import functional as F
from plasticity_lab.numerics.tensor import no_grad
from plasticity_lab.utils.errors import ConfigurationError, ContractViolation, NonFiniteLossError
from tests.factories import make_batch, make_tiny_agent, tiny_agent_config


def snapshot(agent: Agent, group: str) -> Dict[str, np.ndarray]:
    module = agent.modules()[group]
    return {name: p.data.copy() for name, p in module.named_parameters().items()}


def assert_unchanged(before: Dict[str, np.ndarray], agent: Agent, group: str) -> None:
    after = snapshot(agent, group)
    assert before.keys() == after.keys()
    for name in before:
        np.testing.assert_array_equal(after[name], before[name], err_msg=name)


def changed(before: Dict[str, np.ndarray], agent: Agent, group: str) -> bool:
    after = snapshot(agent, group)
    return any(not np.array_equal(after[name], before[name]) for name in before)


def test_stddev_schedule_is_linear_then_flat():
    agent = make_tiny_agent(config=AgentConfig(stddev_horizon=50_000, dtype="float64"))
    assert agent.stddev(0) == pytest.approx(1.0)
    assert agent.stddev(25_000) == pytest.approx(0.55)
    assert agent.stddev(50_000) == pytest.approx(0.1)
    assert agent.stddev(10**6) == pytest.approx(0.1)


def test_eval_actions_are_deterministic_and_bounded(tiny_agent, batch):
    obs = batch.obs[0]
    first = tiny_agent.act(obs, "eval")
    second = tiny_agent.act(obs, "eval")

    np.testing.assert_array_equal(first, second)
    assert first.shape == (2,)
    assert first.dtype == np.float32
    assert np.all(np.abs(first) <= 1.0)


def test_explore_noise_is_clipped(tiny_agent, batch):
    obs = batch.obs[0]
    mean = tiny_agent.act(obs, "eval")
    rng = np.random.default_rng(0)
    clip = tiny_agent.config.noise_clip
    for _ in range(200):
        action = tiny_agent.act(obs, "explore", rng)
        assert np.all(np.abs(action) <= 1.0)
        assert np.all(np.abs(action - mean) <= clip + 1e-6)


def test_act_rejects_bad_calls(tiny_agent, batch):
    with pytest.raises(ContractViolation):
        tiny_agent.act(batch.obs, "eval")
    with pytest.raises(ContractViolation):
        tiny_agent.act(batch.obs[0], "explore")
    with pytest.raises(ConfigurationError):
        tiny_agent.act(batch.obs[0], "greedy")  # type: ignore[arg-type]


def test_td_target_uses_the_smaller_target_head(tiny_agent):
    target = tiny_agent.critic_target
    for head, bias in ((target.q1, 2.0), (target.q2, 5.0)):
        head.out.weight.assign(np.zeros(head.out.weight.shape))
        head.out.bias.assign(np.full(head.out.bias.shape, bias))
    batch = make_batch(size=6, discount=0.970299).replace(n_step_reward=np.ones(6))

    y = tiny_agent.td_target(batch, np.random.default_rng(0))
    np.testing.assert_allclose(y, 2.940598, rtol=0, atol=1e-12)


def test_zero_discount_target_is_the_reward(tiny_agent):
    batch = make_batch(size=5, discount=0.0)
    y = tiny_agent.td_target(batch, np.random.default_rng(1))
    np.testing.assert_array_equal(y, batch.n_step_reward)


def test_critic_update_trains_encoder_but_not_actor(tiny_agent, batch):
    encoder = snapshot(tiny_agent, "encoder")
    actor = snapshot(tiny_agent, "actor")
    critic = snapshot(tiny_agent, "critic")

    result = tiny_agent.update_critic(batch, np.random.default_rng(0))

    assert np.isfinite(result.loss)
    assert result.l2_penalty == 0.0
    assert not result.features.requires_grad
    assert changed(encoder, tiny_agent, "encoder")
    assert changed(critic, tiny_agent, "critic")
    assert_unchanged(actor, tiny_agent, "actor")


def test_actor_update_leaves_encoder_and_critic_alone(tiny_agent, batch):
    encoder = snapshot(tiny_agent, "encoder")
    actor = snapshot(tiny_agent, "actor")
    critic = snapshot(tiny_agent, "critic")

    loss = tiny_agent.update_actor(batch)

    assert np.isfinite(loss)
    assert changed(actor, tiny_agent, "actor")
    assert_unchanged(encoder, tiny_agent, "encoder")
    assert_unchanged(critic, tiny_agent, "critic")
    assert all(p.grad is None for p in tiny_agent.critic.parameters())


def test_update_actor_needs_input(tiny_agent):
    with pytest.raises(ContractViolation):
        tiny_agent.update_actor()


def test_actor_gradient_matches_finite_differences(tiny_agent, batch):
    with no_grad():
        features = tiny_agent.encoder(batch.obs)
    param = tiny_agent.actor.policy.out.weight

    def actor_loss() -> float:
        with no_grad():
            q1, q2 = tiny_agent.critic(features, tiny_agent.actor(features))
        return float(-np.minimum(q1.data, q2.data).mean())

    tiny_agent.actor.zero_grad()
    q1, q2 = tiny_agent.critic(features, tiny_agent.actor(features))
    loss = -F.minimum(q1, q2).mean()
    loss.backward()
    analytic = param.grad.copy()

    h = 1e-6
    numeric = np.zeros_like(param.data)
    for idx in np.ndindex(param.shape):
        original = param.data[idx]
        param.data[idx] = original + h
        plus = actor_loss()
        param.data[idx] = original - h
        minus = actor_loss()
        param.data[idx] = original
        numeric[idx] = (plus - minus) / (2 * h)

    np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)


def test_target_follows_polyak_average(tiny_agent, batch):
    tau = tiny_agent.config.tau
    before = {target.name: target.data.copy() for target, _ in tiny_agent.target_pairs()}

    tiny_agent.update_critic(batch, np.random.default_rng(2))

    for target, online in tiny_agent.target_pairs():
        expected = (1 - tau) * before[target.name] + tau * online.data
        np.testing.assert_allclose(target.data, expected, rtol=0, atol=1e-12)
        assert target.frozen


def test_target_pairs_match_by_name(tiny_agent):
    pairs = tiny_agent.target_pairs()
    assert len(pairs) == len(tiny_agent.critic.parameters())
    for target, online in pairs:
        assert target.name.startswith("critic_target.")
        assert tiny_agent.online_name(target.name) == online.name
        np.testing.assert_array_equal(target.data, online.data)


def test_sync_target_copies_selected_names(tiny_agent):
    q1 = tiny_agent.critic.q1.fc1.weight
    q2 = tiny_agent.critic.q2.fc1.weight
    q1.assign(q1.data + 1.0)
    q2.assign(q2.data + 1.0)

    tiny_agent.sync_target({q1.name})

    np.testing.assert_array_equal(tiny_agent.critic_target.q1.fc1.weight.data, q1.data)
    np.testing.assert_allclose(tiny_agent.critic_target.q2.fc1.weight.data, q2.data - 1.0, atol=1e-12)
    assert not np.allclose(tiny_agent.critic_target.q2.fc1.weight.data, q2.data)


def test_target_critic_follows_the_online_spectral_estimate():
    agent = make_tiny_agent(spectral_norm=True)
    pairs = agent.spectral_pairs()
    assert [target.weight.name for target, _ in pairs] == ["critic_target.q1.fc1.weight", "critic_target.q2.fc1.weight"]
    initial = [target.spectral_u.copy() for target, _ in pairs]

    for seed in range(200):
        agent.update(make_batch(seed=seed), np.random.default_rng(seed))

    for (target, online), start in zip(pairs, initial):
        assert not np.array_equal(target.spectral_u, start)
        np.testing.assert_array_equal(target.spectral_u, online.spectral_u)
        with no_grad():
            normed = target.effective_weight().data
        assert np.linalg.norm(normed, 2) == pytest.approx(1.0, rel=2e-2)


def test_sync_target_copies_selected_spectral_vectors():
    agent = make_tiny_agent(spectral_norm=True)
    q1, q2 = agent.critic.q1.fc1, agent.critic.q2.fc1
    target_q2 = agent.critic_target.q2.fc1.spectral_u.copy()
    q1.spectral_u = -q1.spectral_u
    q2.spectral_u = -q2.spectral_u

    agent.sync_target({q1.weight.name})

    np.testing.assert_array_equal(agent.critic_target.q1.fc1.spectral_u, q1.spectral_u)
    np.testing.assert_array_equal(agent.critic_target.q2.fc1.spectral_u, target_q2)


def test_non_finite_loss_stops_the_update(tiny_agent):
    batch = make_batch().replace(n_step_reward=np.full(4, np.nan))
    critic = snapshot(tiny_agent, "critic")
    with pytest.raises(NonFiniteLossError) as excinfo:
        tiny_agent.update_critic(batch, np.random.default_rng(0))
    assert excinfo.value.which == "critic"
    assert_unchanged(critic, tiny_agent, "critic")


def test_frozen_encoder_stays_at_initialization(batch):
    agent = make_tiny_agent(config=tiny_agent_config(freeze_encoder=True))
    encoder = snapshot(agent, "encoder")
    critic = snapshot(agent, "critic")

    agent.update(batch, np.random.default_rng(0), pad=1)

    assert_unchanged(encoder, agent, "encoder")
    assert changed(critic, agent, "critic")


def test_full_update_with_every_architecture_flag(batch):
    agent = make_tiny_agent(
        layer_norm=True,
        spectral_norm=True,
        crelu_critic=True,
        weight_decay=1e-4,
        l2_init_coef=1e-2,
    )
    info = agent.update(batch, np.random.default_rng(0), pad=2, aug_rng=np.random.default_rng(1))
    assert np.isfinite(info.critic_loss)
    assert np.isfinite(info.actor_loss)

    second = agent.update_critic(batch, np.random.default_rng(3))
    assert second.l2_penalty > 0.0


def test_same_seed_builds_identical_agents():
    first = make_tiny_agent(seed=7).named_parameters()
    second = make_tiny_agent(seed=7).named_parameters()
    assert first.keys() == second.keys()
    for name in first:
        np.testing.assert_array_equal(first[name].data, second[name].data)
