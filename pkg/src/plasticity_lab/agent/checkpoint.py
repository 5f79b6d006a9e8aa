"""Agent checkpoints: a keyed ``.npz`` archive plus a sha256 manifest.

Keys:

* ``param/<name>``: parameter values, online and target.
* ``adam/<group>/<name>/{m,v,t}``: optimizer moments and step counts.
* ``spectral/<weight name>``: power-iteration vectors of spectrally normed layers.
* ``meta/header``: JSON with ``format_version``, ``step`` and parameter shapes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict

import numpy as np

from plasticity_lab.agent.agent import Agent
from plasticity_lab.numerics.layers import Linear

FORMAT_VERSION = 1


def manifest_path(path: str | Path) -> Path:
    target = Path(path)
    return target.with_name(target.stem + ".manifest.json")


def _file_hash(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            h.update(chunk)
    return h.hexdigest()


def _validate_integrity(path: Path) -> None:
    manifest_file = manifest_path(path)
    if not manifest_file.exists():
        return
    try:
        manifest = json.loads(manifest_file.read_text(encoding="utf-8"))
    except Exception:
        raise ValueError("Corrupted checkpoint manifest.")
    expected = manifest.get(path.name)
    if not expected or _file_hash(path) != expected:
        raise ValueError(f"Integrity check failed for {path.name}; refusing to load checkpoint.")


def _spectral_layers(agent: Agent) -> Dict[str, Linear]:
    layers: Dict[str, Linear] = {}
    for module in agent.modules().values():
        for sub in module.modules():
            if isinstance(sub, Linear) and sub.spectral_u is not None:
                layers[sub.weight.name] = sub
    return layers


def save_checkpoint(agent: Agent, path: str | Path) -> Path:
    """Write the agent to ``path`` (``.npz``) and its integrity manifest beside it."""

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    named = agent.named_parameters()
    arrays: Dict[str, np.ndarray] = {f"param/{name}": p.data for name, p in named.items()}
    for group, optimizer in agent.optimizers.items():
        for key, value in optimizer.state_dict().items():
            arrays[f"adam/{group}/{key}"] = value
    for name, layer in _spectral_layers(agent).items():
        arrays[f"spectral/{name}"] = layer.spectral_u
    header = {
        "format_version": FORMAT_VERSION,
        "step": agent.step,
        "injected": sorted(agent.injected),
        "parameters": {name: list(p.shape) for name, p in named.items()},
    }
    arrays["meta/header"] = np.array(json.dumps(header, sort_keys=True))

    with target.open("wb") as f:
        np.savez(f, **arrays)
    manifest = {target.name: _file_hash(target)}
    manifest_path(target).write_text(json.dumps(manifest), encoding="utf-8")
    return target


def _read_header(archive: Any) -> Dict[str, Any]:
    if "meta/header" not in archive.files:
        raise ValueError("Checkpoint has no header")
    header = json.loads(str(archive["meta/header"]))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"Unsupported checkpoint format version {header.get('format_version')}")
    return header


def load_checkpoint(agent: Agent, path: str | Path) -> Dict[str, Any]:
    """Restore ``agent`` in place from ``path``; the agent must have the same structure."""

    target = Path(path)
    if not target.exists():
        raise FileNotFoundError(f"Checkpoint not found: {target}")
    _validate_integrity(target)
    with np.load(target, allow_pickle=False) as archive:
        header = _read_header(archive)
        named = agent.named_parameters()
        stored = set(header["parameters"])
        if stored != set(named):
            missing = sorted(set(named) - stored)
            extra = sorted(stored - set(named))
            raise ValueError(f"Checkpoint structure mismatch; missing {missing}, unexpected {extra}")
        for name, p in named.items():
            p.assign(archive[f"param/{name}"])
        for group, optimizer in agent.optimizers.items():
            prefix = f"adam/{group}/"
            optimizer.load_state_dict(
                {key[len(prefix) :]: archive[key] for key in archive.files if key.startswith(prefix)}
            )
        for name, layer in _spectral_layers(agent).items():
            layer.spectral_u = np.array(archive[f"spectral/{name}"])
    agent.step = int(header["step"])
    return header


def describe_checkpoint(path: str | Path) -> Dict[str, Any]:
    """Summarize a checkpoint without building an agent."""

    target = Path(path)
    if not target.exists():
        raise FileNotFoundError(f"Checkpoint not found: {target}")
    _validate_integrity(target)
    with np.load(target, allow_pickle=False) as archive:
        header = _read_header(archive)
        groups: Dict[str, Dict[str, float]] = {}
        for name in header["parameters"]:
            group = name.split(".", 1)[0]
            values = archive[f"param/{name}"]
            entry = groups.setdefault(group, {"tensors": 0, "values": 0, "sq_norm": 0.0})
            entry["tensors"] += 1
            entry["values"] += int(values.size)
            entry["sq_norm"] += float(np.sum(np.square(values, dtype=np.float64)))
    return {
        "path": str(target),
        "format_version": header["format_version"],
        "step": header["step"],
        "injected": header["injected"],
        "groups": {
            group: {"tensors": e["tensors"], "values": e["values"], "norm": float(np.sqrt(e["sq_norm"]))}
            for group, e in sorted(groups.items())
        },
    }
