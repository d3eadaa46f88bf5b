"""Hierarchical seed derivation.

Every random stream in the toolkit is derived from a single root seed by a
path of integer or string keys, e.g. ``derive_seed(root, "vqe", "hidden", 12)``
for iteration 12 of the hidden-inverse arm. Derivation goes through
:class:`numpy.random.SeedSequence`, so sibling streams are statistically
independent and the mapping is stable across processes and platforms.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (bool, np.bool_)):
        return int(part)
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("seed path keys must be non-negative")
        return int(part)
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported seed key {part!r}")


def derive_seed(root: int, *path) -> int:
    """Return a 63-bit integer seed for ``path`` below ``root``."""
    ss = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(_key(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def derive_rng(root: int, *path) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, *path))
