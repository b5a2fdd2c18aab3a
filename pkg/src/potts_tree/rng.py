"""Deterministic random substreams built on a counter-based bit generator.

Every stochastic routine in the package draws from a Philox generator keyed
by ``(seed, stream)``.  Streams keyed differently are statistically
independent, so results never depend on execution order, chunking, or worker
count: trial t of a run always consumes exactly the stream ``(seed, t)``.
Auxiliary draws (for example a quenched tree shared by all trials) use stream
indices with the top bit set, which ordinary trial indices never reach.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Streams with the top bit set are reserved for non-trial draws.
AUX_STREAM_BASE = 1 << 63


def philox_stream(seed: int, stream: int) -> np.random.Generator:
    """Generator for the substream ``(seed, stream)`` of a base seed."""
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    if stream < 0:
        raise ValueError(f"stream must be >= 0, got {stream}")
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def aux_stream(seed: int, index: int) -> np.random.Generator:
    """Reserved substream for one-off draws that must not collide with trials."""
    return philox_stream(seed, AUX_STREAM_BASE | index)
