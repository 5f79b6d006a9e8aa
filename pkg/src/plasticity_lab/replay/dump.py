"""Flat binary episode dumps for offline oracle checks.

Layout: 8 magic bytes, a little-endian uint32 header length, a UTF-8 JSON
header describing every array (name, dtype, shape), then the arrays in
header order, each row-major.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Dict

import numpy as np

from plasticity_lab.replay.buffer import ReplayBuffer

MAGIC = b"PLABEP01"
FORMAT_VERSION = 1


def dump_episodes(buffer: ReplayBuffer, path: str | Path) -> Path:
    """Write every stored transition, oldest first."""

    slots = buffer._slots()
    last = buffer._last[slots]
    final_slots = slots[last]
    arrays: Dict[str, np.ndarray] = {
        "obs": buffer._obs[slots],
        "action": buffer._action[slots],
        "reward": buffer._reward[slots],
        "discount": buffer._discount[slots],
        "last": last.astype(np.uint8),
        "final_next_obs": (
            np.stack([buffer._final_next[int(s)] for s in final_slots])
            if final_slots.size
            else np.zeros((0, *buffer.obs_shape), dtype=np.uint8)
        ),
    }
    header = {
        "format_version": FORMAT_VERSION,
        "transitions": int(slots.size),
        "arrays": [
            {"name": name, "dtype": str(array.dtype), "shape": list(array.shape)}
            for name, array in arrays.items()
        ],
    }
    encoded = json.dumps(header).encode("utf-8")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", len(encoded)))
        handle.write(encoded)
        for array in arrays.values():
            handle.write(np.ascontiguousarray(array).tobytes(order="C"))
    return target


def load_episodes(path: str | Path) -> Dict[str, np.ndarray]:
    """Read a dump back into named arrays."""

    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path} is not an episode dump")
    (length,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12 : 12 + length].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"Unsupported episode dump version {header.get('format_version')}")
    offset = 12 + length
    arrays: Dict[str, np.ndarray] = {}
    for spec in header["arrays"]:
        dtype = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"])) if spec["shape"] else 1
        nbytes = count * dtype.itemsize
        arrays[spec["name"]] = np.frombuffer(raw[offset : offset + nbytes], dtype=dtype).reshape(spec["shape"]).copy()
        offset += nbytes
    return arrays
