"""Deterministic child-seed derivation.

Every random stream in an experiment is keyed by (master seed, trial index,
block index, purpose tag). The tag is hashed with CRC32 so it is stable
across interpreter runs (``hash()`` on str is salted per process).
"""

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def child_seed(master, trial=0, block=0, purpose=""):
    tag = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence([int(master) & _MASK64, int(trial), int(block), tag])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def child_rng(master, trial=0, block=0, purpose=""):
    return np.random.default_rng(child_seed(master, trial, block, purpose))
