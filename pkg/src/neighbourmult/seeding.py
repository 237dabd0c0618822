"""Deterministic seed derivation.

Every random choice in the package draws from a ``numpy.random.Generator``
seeded by :func:`derive_seed`.  A child seed is the first 8 bytes of a
BLAKE2b digest over the parent seed and a tuple of keys, read as an
unsigned little-endian 64-bit integer.  Keys are rendered with ``repr`` so
``("MultLow", 3)`` and ``("MultLow", "3")`` give different children.

Because a child depends only on ``(master, keys)``, adding a new algorithm
or setting never shifts the seeds of existing ones, and the results do not
depend on the order in which cells are scheduled.
"""

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(master, *keys):
    """Mix ``master`` with ``keys`` into a new 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(repr(int(master) & SEED_MASK).encode())
    for k in keys:
        h.update(b"\x1f")
        h.update(repr(k).encode())
    return int.from_bytes(h.digest(), "little")


def rng_for(master, *keys):
    """Generator seeded by ``derive_seed(master, *keys)``."""
    return np.random.default_rng(derive_seed(master, *keys))


def member_seeds(master, count, *keys):
    """Seeds for ``count`` ensemble members, distinct with overwhelming probability."""
    return [derive_seed(master, *keys, "member", i) for i in range(count)]
