"""Named RNG streams, re-exported for harness users."""

from plasticity_lab.utils.seeding import STREAM_NAMES, rng_stream, stream_seed

__all__ = ["STREAM_NAMES", "rng_stream", "stream_seed"]
