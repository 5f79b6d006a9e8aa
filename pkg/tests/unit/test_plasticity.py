from __future__ import annotations

from typing import Dict

import numpy as np
import pytest
from scipy import stats

from plasticity_lab.numerics.layers import MLP, ActivationProbe
from plasticity_lab.numerics.parameter import Parameter
from plasticity_lab.numerics.tensor import Tensor, no_grad
from plasticity_lab.plasticity import (
    InjectedHead,
    InterventionConfig,
    InterventionSchedule,
    ResetConfig,
    ShrinkPerturbConfig,
    apply_interventions,
    fau_report,
    inject_plasticity,
    l2_init_penalty,
    measure_fau,
    reset_heads,
    shrink_and_perturb,
    snapshot_weight_norms,
)
from plasticity_lab.plasticity.config import InjectionConfig
from plasticity_lab.replay import ReplayBuffer, Transition
from plasticity_lab.utils.errors import ConfigurationError
from tests.factories import TINY_OBS_SHAPE, make_batch, make_tiny_agent


def values(module) -> Dict[str, np.ndarray]:
    return {name: p.data.copy() for name, p in module.named_parameters().items()}


def critic_values(agent, batch):
    with no_grad():
        q1, q2 = agent.critic(agent.encoder(batch.obs), batch.action)
    return q1.data.copy(), q2.data.copy()


# ---------------------------------------------------------------------- FAU
def test_probe_fraction_counts_positive_units():
    probe = ActivationProbe()
    probe.record("critic", np.array([[0.3, 0.0, 1.2, 2.0], [0.1, 0.4, 0.0, 0.5]]))
    assert probe.fraction("critic") == 0.75


def test_crelu_critic_is_exactly_half_active():
    agent = make_tiny_agent(crelu_critic=True)
    for seed in range(50):
        assert measure_fau("critic", agent, make_batch(seed=seed, size=8)) == 0.5


def test_fresh_relu_network_is_about_half_active():
    fractions = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        net = MLP("net", 16, 256, 2, rng)
        probe = ActivationProbe()
        with no_grad():
            net(Tensor(rng.standard_normal((64, 16))), probe, "net")
        fractions.append(probe.fraction("net"))
    assert all(0.4 <= f <= 0.6 for f in fractions)


def test_fau_report_covers_every_module(tiny_agent, batch):
    report = fau_report(tiny_agent, batch, step=7)

    assert report.step == 7
    for phi in (report.phi_encoder, report.phi_actor, report.phi_critic):
        assert 0.0 <= phi <= 1.0
    assert report.phi_critic == measure_fau("critic", tiny_agent, batch)
    norms = report.weight_norms
    assert set(norms) == {"encoder", "actor", "critic", "total"}
    assert norms["total"] == pytest.approx(np.sqrt(norms["encoder"] ** 2 + norms["actor"] ** 2 + norms["critic"] ** 2))


def test_fau_measurement_does_not_train(tiny_agent, batch):
    before = values(tiny_agent.critic)
    measure_fau("critic", tiny_agent, batch)
    after = values(tiny_agent.critic)
    for name in before:
        np.testing.assert_array_equal(after[name], before[name])


def test_unknown_fau_module(tiny_agent, batch):
    with pytest.raises(ConfigurationError):
        measure_fau("trunk", tiny_agent, batch)  # type: ignore[arg-type]


def test_weight_norms_track_parameters(tiny_agent):
    norms = snapshot_weight_norms(tiny_agent)
    expected = np.sqrt(sum(float(np.sum(p.data**2)) for p in tiny_agent.actor.parameters()))
    assert norms["actor"] == pytest.approx(expected)


# -------------------------------------------------------------------- reset
def filled_buffer() -> ReplayBuffer:
    buffer = ReplayBuffer(20, TINY_OBS_SHAPE, 2)
    rng = np.random.default_rng(0)
    for t in range(10):
        buffer.push(
            Transition(
                obs=rng.random(TINY_OBS_SHAPE),
                action=rng.uniform(-1, 1, 2),
                reward=float(rng.random()),
                discount=1.0,
                next_obs=rng.random(TINY_OBS_SHAPE),
                last=t == 9,
            )
        )
    return buffer


def test_reset_redraws_heads_and_keeps_the_rest(tiny_agent):
    for seed in range(2):
        tiny_agent.update(make_batch(seed=seed), np.random.default_rng(seed))
    buffer = filled_buffer()
    stored = buffer._obs.copy()
    encoder = values(tiny_agent.encoder)
    actor = values(tiny_agent.actor)

    names = reset_heads(tiny_agent, ["actor.*", "critic.*"], np.random.default_rng(5))

    assert set(names) == {p.name for p in tiny_agent.actor.parameters() + tiny_agent.critic.parameters()}
    np.testing.assert_array_equal(buffer._obs, stored)
    for name, value in values(tiny_agent.encoder).items():
        np.testing.assert_array_equal(value, encoder[name])
    assert any(not np.array_equal(p.data, actor[p.name]) for p in tiny_agent.actor.parameters())
    np.testing.assert_array_equal(tiny_agent.actor.policy.fc1.bias.data, 0.0)

    for group in ("actor", "critic"):
        for key, array in tiny_agent.optimizers[group].state_dict().items():
            np.testing.assert_array_equal(array, 0, err_msg=key)
    assert any(
        np.any(array != 0) for array in tiny_agent.optimizers["encoder"].state_dict().values()
    )
    for target, online in tiny_agent.target_pairs():
        np.testing.assert_array_equal(target.data, online.data)


def test_reset_can_target_one_head(tiny_agent):
    actor = values(tiny_agent.actor)
    q2 = values(tiny_agent.critic.q2)
    names = reset_heads(tiny_agent, ["critic.q1.*"], np.random.default_rng(1))

    assert names and all(name.startswith("critic.q1.") for name in names)
    for name, value in values(tiny_agent.actor).items():
        np.testing.assert_array_equal(value, actor[name])
    for name, value in values(tiny_agent.critic.q2).items():
        np.testing.assert_array_equal(value, q2[name])


def test_reset_rejects_patterns_matching_nothing(tiny_agent):
    with pytest.raises(ConfigurationError):
        reset_heads(tiny_agent, ["encoder.*"], np.random.default_rng(0))


# ---------------------------------------------------------------- injection
def test_critic_injection_preserves_outputs(tiny_agent):
    batch = make_batch(seed=3, size=100)
    before = critic_values(tiny_agent, batch)
    heads = inject_plasticity(tiny_agent, "critic", np.random.default_rng(9))

    assert isinstance(heads, list) and len(heads) == 2
    after = critic_values(tiny_agent, batch)
    np.testing.assert_allclose(after[0], before[0], rtol=0, atol=1e-6)
    np.testing.assert_allclose(after[1], before[1], rtol=0, atol=1e-6)
    assert isinstance(tiny_agent.critic_target.q1, InjectedHead)
    assert tiny_agent.injected == {"critic"}


def test_actor_injection_preserves_actions(tiny_agent):
    batch = make_batch(seed=4, size=100)
    before = [tiny_agent.act(obs, "eval") for obs in batch.obs]
    inject_plasticity(tiny_agent, "actor", np.random.default_rng(2))
    after = [tiny_agent.act(obs, "eval") for obs in batch.obs]
    np.testing.assert_allclose(np.array(after), np.array(before), rtol=0, atol=1e-6)


def test_injected_frozen_parts_never_change(tiny_agent):
    heads = inject_plasticity(tiny_agent, "critic", np.random.default_rng(9))
    frozen = {}
    trainable = {}
    for head in heads:
        frozen.update(values(head.base))
        frozen.update(values(head.frozen_copy))
        trainable.update(values(head.trainable))

    for step in range(100):
        tiny_agent.update(make_batch(seed=step), np.random.default_rng(step))

    current = values(tiny_agent.critic)
    for name, value in frozen.items():
        np.testing.assert_array_equal(current[name], value, err_msg=name)
    assert any(not np.array_equal(current[name], value) for name, value in trainable.items())
    registered = set(tiny_agent.optimizers["critic"].params)
    assert registered == set(trainable)


def test_trainable_head_learns_like_a_standalone_head():
    rng = np.random.default_rng(4)
    head = InjectedHead.wrap(MLP("head", 6, 8, 3, rng), np.random.default_rng(5))
    standalone = head.trainable.clone("head.inject_train.", "solo.")
    x = Tensor(rng.standard_normal((5, 6)))
    weights = rng.standard_normal((5, 3))

    (head.preactivation(x) * Tensor(weights)).sum().backward()
    (standalone.preactivation(x) * Tensor(weights)).sum().backward()

    for mine, solo in zip(head.trainable.parameters(), standalone.parameters()):
        np.testing.assert_allclose(mine.grad, solo.grad, rtol=1e-12, atol=1e-12, err_msg=mine.name)
    assert all(p.grad is None for p in head.base.parameters() + head.frozen_copy.parameters())

    param = head.trainable.fc1.weight

    def objective() -> float:
        with no_grad():
            return float((head.preactivation(x).data * weights).sum())

    h = 1e-6
    numeric = np.zeros_like(param.data)
    for idx in np.ndindex(param.shape):
        original = param.data[idx]
        param.data[idx] = original + h
        plus = objective()
        param.data[idx] = original - h
        minus = objective()
        param.data[idx] = original
        numeric[idx] = (plus - minus) / (2 * h)
    np.testing.assert_allclose(param.grad, numeric, rtol=1e-5, atol=1e-8)


def test_double_injection_is_rejected(tiny_agent):
    inject_plasticity(tiny_agent, "actor", np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        inject_plasticity(tiny_agent, "actor", np.random.default_rng(0))


# ------------------------------------------------------- shrink and perturb
def test_shrink_with_zero_perturbation_scales_weights(tiny_agent):
    before = values(tiny_agent.critic)
    touched = shrink_and_perturb(
        tiny_agent, ["critic.*"], 0.8, np.random.default_rng(0), draw=lambda p, rng: np.zeros_like(p.data)
    )

    after = values(tiny_agent.critic)
    assert touched
    for name in touched:
        np.testing.assert_array_equal(after[name], 0.8 * before[name])


def test_shrink_perturb_noise_follows_the_initializer(tiny_agent):
    before = values(tiny_agent.critic)
    touched = shrink_and_perturb(tiny_agent, ["critic.*.weight"], 0.5, np.random.default_rng(11))
    after = values(tiny_agent.critic)
    reference = values(make_tiny_agent(seed=123).critic)

    noise = np.concatenate([(after[n] - 0.5 * before[n]).ravel() for n in touched])
    fresh = np.concatenate([reference[n].ravel() for n in touched])
    _, p_value = stats.ks_2samp(noise, fresh)
    assert p_value > 0.001


def test_shrink_perturb_validation(tiny_agent):
    with pytest.raises(ConfigurationError):
        shrink_and_perturb(tiny_agent, ["critic.*"], 0.0, np.random.default_rng(0))
    with pytest.raises(ConfigurationError):
        shrink_and_perturb(tiny_agent, ["nothing.*"], 0.5, np.random.default_rng(0))


# ------------------------------------------------------------------ L2-Init
def test_l2_init_penalty_value_and_gradient():
    p = Parameter("w", np.zeros(1), "zeros")
    p.assign(np.array([2.0]))
    frozen = Parameter("f", np.zeros(3), "zeros", trainable=False)
    frozen.assign(np.ones(3))

    penalty = l2_init_penalty([p, frozen], 1e-2)
    assert penalty.item() == pytest.approx(0.04)
    penalty.backward()
    np.testing.assert_allclose(p.grad, [0.04])


def test_l2_init_penalty_is_zero_at_initialization(tiny_agent):
    assert l2_init_penalty(tiny_agent.critic.parameters(), 1e-2).item() == 0.0
    assert l2_init_penalty([], 1e-2).item() == 0.0


# ----------------------------------------------------------------- schedule
def test_periodic_steps_stay_inside_the_run():
    assert ResetConfig(interval=100).steps(350) == [100, 200, 300]
    assert ResetConfig(interval=100).steps(300) == [100, 200]
    assert ResetConfig().steps(400) == []
    with pytest.raises(ValueError):
        ResetConfig(count=2, interval=10)


@pytest.mark.parametrize(
    "count, total, expected",
    [
        (3, 400, [100, 200, 300]),
        (1, 1000, [500]),
        (5, 1000, [166, 333, 500, 666, 833]),
        (2, 100, [33, 66]),
        (4, 3, [1, 2]),
    ],
)
def test_reset_count_spreads_that_many_resets(count, total, expected):
    assert ResetConfig(count=count).steps(total) == expected


@pytest.mark.parametrize("count", [2, 5, 10])
def test_reset_count_is_exact_on_long_runs(count):
    for total in (10_000, 50_000, 12_345):
        steps = ResetConfig(count=count).steps(total)
        assert len(steps) == count
        assert 0 < steps[0] and steps[-1] < total


def test_schedule_lists_events_per_step():
    config = InterventionConfig(
        reset=ResetConfig(interval=100),
        shrink_perturb=ShrinkPerturbConfig(interval=200),
        injection=InjectionConfig(module="critic", step=150),
    )
    schedule = InterventionSchedule.from_config(config, 400)

    assert schedule.events_at(100) == ["reset"]
    assert schedule.events_at(150) == ["injection"]
    assert schedule.events_at(200) == ["reset", "shrink_perturb"]
    assert schedule.events_at(400) == []
    with pytest.raises(ValueError):
        InjectionConfig(module="actor")


def test_apply_interventions_runs_each_event(tiny_agent):
    config = InterventionConfig(injection=InjectionConfig(module="actor", step=10))
    critic = values(tiny_agent.critic)

    apply_interventions(tiny_agent, ["reset", "injection"], config, np.random.default_rng(0))

    assert tiny_agent.injected == {"actor"}
    assert any(not np.array_equal(p.data, critic[p.name]) for p in tiny_agent.critic.parameters())
