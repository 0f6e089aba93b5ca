"""Deterministic summation.

Every large average in the package goes through :func:`tree_sum`: the input
is cut into fixed chunks of ``CHUNK`` entries, each chunk is summed on its
own, and the chunk sums are combined pairwise.  The result depends only on
the input array, never on how work was scheduled.
"""
from __future__ import annotations

import numpy as np

CHUNK = 1024


def tree_sum(values) -> complex | float:
    a = np.asarray(values).ravel()
    if a.size == 0:
        return a.dtype.type(0)
    pad = (-a.size) % CHUNK
    if pad:
        a = np.concatenate([a, np.zeros(pad, dtype=a.dtype)])
    partial = a.reshape(-1, CHUNK).sum(axis=1)
    while partial.size > 1:
        if partial.size % 2:
            partial = np.concatenate([partial, np.zeros(1, dtype=partial.dtype)])
        partial = partial[0::2] + partial[1::2]
    return partial[0]


def tree_mean(values):
    a = np.asarray(values)
    return tree_sum(a) / a.size
