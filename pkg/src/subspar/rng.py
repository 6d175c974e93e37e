"""Named random streams derived from a single integer seed.

Every consumer asks for its own stream (``"vdelta"``, ``"edges"``,
``"expander"``, ``"gadget"``, ``"experiment"`` ...) so that changing how many
draws one component makes never shifts the draws of another.
"""

import zlib

import numpy as np

STREAMS = ("vdelta", "edges", "expander", "gadget", "experiment", "resparsify", "verify")


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def stream_entropy(seed: int, name: str, *extra: int) -> list[int]:
    return [int(seed), stream_key(name), *map(int, extra)]


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Generator for stream ``name``; ``extra`` integers split it further (trial ids)."""
    return np.random.default_rng(np.random.SeedSequence(stream_entropy(seed, name, *extra)))


def derive_seed(seed: int, name: str, *extra: int) -> int:
    """A plain 63-bit integer seed for APIs that want an int (networkx, subprocess runs)."""
    ss = np.random.SeedSequence(stream_entropy(seed, name, *extra))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
