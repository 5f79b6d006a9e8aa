"""Named, independent random streams derived from one root seed."""

from __future__ import annotations

import hashlib
from typing import Any

import numpy as np

from plasticity_lab.utils.errors import ConfigurationError

STREAM_NAMES = frozenset({"env", "init", "action_noise", "augment", "sample", "intervention"})


def stream_seed(root_seed: int, name: str, *path: Any) -> int:
    """Return the 128-bit integer seed for ``root_seed``/``name``[/``path``...]."""

    if name not in STREAM_NAMES:
        raise ConfigurationError(
            f"Unknown RNG stream '{name}'. Expected one of: {', '.join(sorted(STREAM_NAMES))}"
        )
    key = "/".join([str(int(root_seed)), name, *(str(p) for p in path)])
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()
    return int(digest[:32], 16)


def rng_stream(root_seed: int, name: str, *path: Any) -> np.random.Generator:
    """Create the generator for a named stream.

    Streams are seeded from a hash of the root seed and the stream path, so
    drawing from one never shifts another.
    """

    return np.random.Generator(np.random.PCG64(stream_seed(root_seed, name, *path)))
