"""Named random streams.

Every random choice in the package is keyed by the master seed plus a label
and integer indices, so any sub-computation can be reproduced on its own.
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(master, *labels):
    """64-bit seed for the stream ``(master, *labels)``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master) & MASK64).encode())
    for lab in labels:
        h.update(b"\x1f")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest(), "little")


def generator(master, *labels):
    return np.random.default_rng(derive_seed(master, *labels))
