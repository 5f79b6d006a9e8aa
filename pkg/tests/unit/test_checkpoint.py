from __future__ import annotations

import json

import numpy as np
import pytest

from plasticity_lab.agent import describe_checkpoint, load_checkpoint, save_checkpoint
from plasticity_lab.agent.checkpoint import manifest_path
from tests.factories import make_batch, make_tiny_agent


def trained_agent(**flags):
    agent = make_tiny_agent(seed=1, **flags)
    for i in range(2):
        agent.update(make_batch(seed=i), np.random.default_rng(i))
    agent.step = 5
    return agent


def test_round_trip_restores_parameters_optimizers_and_step(tmp_path):
    source = trained_agent(spectral_norm=True)
    path = save_checkpoint(source, tmp_path / "ckpt" / "agent.npz")
    assert path.exists()
    assert manifest_path(path).name == "agent.manifest.json"

    restored = make_tiny_agent(seed=99, spectral_norm=True)
    header = load_checkpoint(restored, path)

    assert header["step"] == 5
    assert restored.step == 5
    original = source.named_parameters()
    for name, p in restored.named_parameters().items():
        np.testing.assert_array_equal(p.data, original[name].data, err_msg=name)
    for group, optimizer in restored.optimizers.items():
        expected = source.optimizers[group].state_dict()
        actual = optimizer.state_dict()
        assert expected.keys() == actual.keys()
        for key in expected:
            np.testing.assert_array_equal(actual[key], expected[key], err_msg=key)
    np.testing.assert_array_equal(restored.actor.policy.fc1.spectral_u, source.actor.policy.fc1.spectral_u)


def test_restored_agent_continues_identically(tmp_path):
    source = trained_agent()
    path = save_checkpoint(source, tmp_path / "agent.npz")
    restored = make_tiny_agent(seed=3)
    load_checkpoint(restored, path)

    batch = make_batch(seed=10)
    a = source.update(batch, np.random.default_rng(4))
    b = restored.update(batch, np.random.default_rng(4))
    assert a == b


def test_tampered_checkpoint_is_refused(tmp_path):
    path = save_checkpoint(trained_agent(), tmp_path / "agent.npz")
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0xFF
    path.write_bytes(bytes(raw))

    with pytest.raises(ValueError, match="Integrity"):
        load_checkpoint(make_tiny_agent(), path)
    with pytest.raises(ValueError):
        describe_checkpoint(path)


def test_corrupted_manifest_is_refused(tmp_path):
    path = save_checkpoint(trained_agent(), tmp_path / "agent.npz")
    manifest_path(path).write_text("{not json", encoding="utf-8")
    with pytest.raises(ValueError, match="manifest"):
        load_checkpoint(make_tiny_agent(), path)


def test_structure_mismatch_is_reported(tmp_path):
    path = save_checkpoint(trained_agent(), tmp_path / "agent.npz")
    with pytest.raises(ValueError, match="structure mismatch"):
        load_checkpoint(make_tiny_agent(layer_norm=True), path)


def test_missing_checkpoint(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(make_tiny_agent(), tmp_path / "absent.npz")
    with pytest.raises(FileNotFoundError):
        describe_checkpoint(tmp_path / "absent.npz")


def test_describe_summarizes_groups(tmp_path):
    agent = trained_agent()
    path = save_checkpoint(agent, tmp_path / "agent.npz")
    summary = describe_checkpoint(path)

    assert summary["step"] == 5
    assert summary["injected"] == []
    assert set(summary["groups"]) == {"encoder", "actor", "critic", "critic_target"}
    actor = summary["groups"]["actor"]
    params = agent.actor.parameters()
    assert actor["tensors"] == len(params)
    assert actor["values"] == sum(p.data.size for p in params)
    expected_norm = np.sqrt(sum(float(np.sum(p.data**2)) for p in params))
    assert actor["norm"] == pytest.approx(expected_norm)
    json.dumps(summary)
