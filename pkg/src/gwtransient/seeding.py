"""Deterministic seed derivation.

Every random stream in the package is derived from a master seed and a
small tuple of integers, so that work can be split across threads without
changing the result.
"""

import os

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x):
    """One round of the splitmix64 output function on a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed, *keys):
    """Mix ``master_seed`` with integer ``keys`` into a new 64-bit seed."""
    h = splitmix64(int(master_seed) & _MASK64)
    for k in keys:
        h = splitmix64(h ^ (int(k) & _MASK64))
    return h


def rng_for(master_seed, *keys):
    """A fresh ``numpy.random.Generator`` seeded from ``derive_seed``."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *keys)))


def worker_count():
    """Worker cap from ``GWT_THREADS``, defaulting to the CPU count."""
    env = os.environ.get("GWT_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return os.cpu_count() or 1
