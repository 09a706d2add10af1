"""Splittable counter-based random streams.

Every stochastic routine in this package draws from an independent stream
keyed by ``(seed, *path)`` where the path names the consumer, e.g.
``stream(seed, scenario_id, "agents", 3)``.  Streams are Philox
counter-based generators, so they are independent regardless of draw
order and reproducible across processes.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(seed: int, *path) -> int:
    """128-bit Philox key derived from the seed and a path of labels."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for part in path:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:16], "little")


def stream(seed: int, *path) -> np.random.Generator:
    """Independent generator for the stream named by ``(seed, *path)``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *path)))
