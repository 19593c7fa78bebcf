"""Deterministic seed derivation.

All randomness in a run flows from one root seed. Stage- or feature-specific
generators are derived by hashing the root seed together with string keys, so
results do not depend on scheduling order, thread count, or feature position.
"""

import hashlib

import numpy as np


def child_seed(root_seed: int, *keys) -> int:
    """Derive a stable 64-bit seed from a root seed and a key path."""
    text = "/".join([str(int(root_seed)), *map(str, keys)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def child_rng(root_seed: int, *keys) -> np.random.Generator:
    """Generator seeded by child_seed(root_seed, *keys)."""
    return np.random.default_rng(child_seed(root_seed, *keys))
