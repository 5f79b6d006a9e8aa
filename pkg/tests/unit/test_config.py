from pathlib import Path

import pytest
from pydantic import ValidationError
from pydantic_settings import SettingsConfigDict

from plasticity_lab.harness.config import ExperimentConfig, dump_config, load_config
from plasticity_lab.utils.config import (
    Settings,
    apply_overrides,
    get_settings,
    parse_assignments,
    parse_flat_text,
    reset_settings_cache,
)
from plasticity_lab.utils.errors import ConfigurationError

SETTINGS_ENV = [
    "PLASTICITY_LAB_OUTPUT_ROOT",
    "PLASTICITY_LAB_LOG_LEVEL",
    "PLASTICITY_LAB_DEFAULT_WORKERS",
    "PLASTICITY_LAB_DEFAULT_DTYPE",
]


def test_settings_loads_from_env_file(tmp_path, monkeypatch):
    for key in SETTINGS_ENV:
        monkeypatch.delenv(key, raising=False)
    env_path = Path(tmp_path) / ".env"
    env_path.write_text(
        "\n".join(
            [
                "PLASTICITY_LAB_OUTPUT_ROOT=/tmp/lab-runs",
                "PLASTICITY_LAB_LOG_LEVEL=DEBUG",
                "PLASTICITY_LAB_DEFAULT_WORKERS=4",
                "PLASTICITY_LAB_DEFAULT_DTYPE=float64",
            ]
        ),
        encoding="utf-8",
    )

    class FileSettings(Settings):
        model_config = SettingsConfigDict(
            env_prefix="PLASTICITY_LAB_", env_file=env_path, env_file_encoding="utf-8", extra="ignore"
        )

    reset_settings_cache()
    loaded = FileSettings()

    assert loaded.output_root == "/tmp/lab-runs"
    assert loaded.log_level == "DEBUG"
    assert loaded.default_workers == 4
    assert loaded.default_dtype == "float64"


def test_settings_defaults(monkeypatch, tmp_path):
    for key in SETTINGS_ENV:
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)

    loaded = reset_settings_cache()

    assert loaded.output_root == "./runs"
    assert loaded.log_level == "INFO"
    assert loaded.default_workers == 1
    assert loaded.default_dtype == "float32"


def test_settings_read_output_root_from_environment(monkeypatch):
    monkeypatch.setenv("PLASTICITY_LAB_OUTPUT_ROOT", "/data/experiments")
    reset_settings_cache()
    try:
        assert get_settings().output_root == "/data/experiments"
        assert ExperimentConfig().resolved_output_dir == Path("/data/experiments")
    finally:
        monkeypatch.delenv("PLASTICITY_LAB_OUTPUT_ROOT")
        reset_settings_cache()


def test_settings_cached_instance_is_reused(monkeypatch):
    monkeypatch.delenv("PLASTICITY_LAB_OUTPUT_ROOT", raising=False)

    reset_settings_cache()
    first = get_settings()
    second = get_settings()

    assert first is second

    third = reset_settings_cache()
    assert third is not first
    assert get_settings() is third


def test_experiment_config_defaults():
    config = ExperimentConfig()

    assert config.protocol == "standard"
    assert config.total_steps == 50_000
    assert config.seeds == [0, 1, 2, 3, 4]
    assert config.env.name == "point_mass"
    assert config.agent.lr == 1e-4
    assert config.agent.batch_size == 256
    assert config.agent.tau == 0.01
    assert config.agent.nstep == 3
    assert config.rr.epsilon == 0.001
    assert config.da.enabled is True


def test_load_config_parses_flat_text(tmp_path):
    path = tmp_path / "exp.txt"
    path.write_text(
        "\n".join(
            [
                "# a comment",
                "protocol = da_toggle",
                "total_steps = 2000",
                "seeds = 3, 7",
                "",
                "env.name = pendulum",
                "env.episode_len = 100",
                "agent.lr = 3e-4  # inline comment",
                "da.schedule = 1000:off",
                "rr.mode = adaptive",
                "interventions.reset.count = 4",
            ]
        ),
        encoding="utf-8",
    )

    config = load_config(path)

    assert config.protocol == "da_toggle"
    assert config.seeds == [3, 7]
    assert config.env.name == "pendulum"
    assert config.agent.lr == pytest.approx(3e-4)
    assert [(t.step, t.on) for t in config.da.schedule] == [(1000, False)]
    assert config.rr.mode == "adaptive"
    assert config.interventions.reset.count == 4


def test_dump_config_round_trips(tmp_path):
    config = ExperimentConfig.model_validate(
        {
            "protocol": "injection",
            "total_steps": 1000,
            "seeds": [1],
            "da": {"schedule": ["200:off", "600:on"]},
            "interventions": {"l2_init": {"coef": 0.01}, "crelu_critic": True},
        }
    )
    path = tmp_path / "config.txt"
    path.write_text(dump_config(config), encoding="utf-8")

    assert load_config(path) == config


def test_unknown_keys_are_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("agent.lrate = 0.1\nenv.colour = red\n", encoding="utf-8")

    with pytest.raises(ConfigurationError, match="agent.lrate, env.colour"):
        load_config(path)


def test_from_dict_filters_unknown_keys_only_when_asked():
    data = {"total_steps": 400, "agent": {"lr": 0.001, "unknown_key": 1}, "another_unknown": 2}

    config = ExperimentConfig.from_dict(data, ignore_unknown=True)
    assert config.agent.lr == 0.001
    assert not hasattr(config, "another_unknown")

    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict(data)


def test_experiment_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig(seeds=[])
    with pytest.raises(ValidationError):
        ExperimentConfig(seeds=[1, 1])
    with pytest.raises(ValidationError):
        ExperimentConfig(total_steps=250)  # not a multiple of 200
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"rr": {"mode": "adaptive", "low": 2.0, "high": 0.5}})
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"da": {"schedule": ["500:off", "100:on"]}})


def test_flat_text_rejects_malformed_lines():
    with pytest.raises(ConfigurationError, match="expected 'key = value'"):
        parse_flat_text("protocol standard\n")
    with pytest.raises(ConfigurationError, match="duplicate key"):
        parse_flat_text("a = 1\na = 2\n")


def test_overrides_apply_dotted_keys():
    config = ExperimentConfig()
    updated = apply_overrides(config, parse_assignments(["agent.batch_size=32", "rr.value = 2"]))

    assert updated.agent.batch_size == 32
    assert updated.rr.value == 2.0
    assert config.agent.batch_size == 256

    with pytest.raises(ConfigurationError):
        parse_assignments(["agent.batch_size"])
    with pytest.raises(ConfigurationError):
        apply_overrides(config, {"agent.nope": 1})
