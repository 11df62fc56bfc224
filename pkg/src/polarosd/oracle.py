"""Brute-force reference decoders for tiny codes.

These enumerate candidates literally and exist to cross-check the fast
paths in tests and acceptance scripts; nothing here is tuned for speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import bpsk
from .gf2 import BitMatrix, systematize_by_reliability

_MAX_K = 12


@dataclass(frozen=True)
class TinyCode:
    """A code small enough to enumerate all 2^k codewords."""

    generator: BitMatrix

    def __post_init__(self):
        if self.generator.rows > _MAX_K:
            raise ValueError(f"k={self.generator.rows} too large to enumerate")

    @property
    def k(self) -> int:
        return self.generator.rows

    @property
    def N(self) -> int:
        return self.generator.cols


def all_codewords(code: TinyCode) -> np.ndarray:
    """All 2^k codewords, one per row, message bits counting up."""
    k = code.k
    msgs = ((np.arange(1 << k)[:, None] >> np.arange(k)[None, :]) & 1)
    g = code.generator.to_array()
    return ((msgs.astype(np.int64) @ g) & 1).astype(np.uint8)


def ml_decode(y, code: TinyCode) -> np.ndarray:
    """Codeword minimizing ||y - BPSK(c)||; exact ties break to the
    lexicographically smallest codeword."""
    y = np.asarray(y, dtype=np.float64)
    cws = all_codewords(code)
    d = np.sum((y[None, :] - bpsk(cws)) ** 2, axis=1)
    tied = np.flatnonzero(d == d.min())
    best = min(tied, key=lambda i: tuple(cws[i]))
    return cws[best].copy()


def exhaustive_osd(y, llr, code: TinyCode, q: int,
                   count_patterns: bool = False):
    """Literal OSD(q): re-encode every flip pattern of weight at most q on
    the most reliable independent basis and keep the closest codeword.

    Returns the estimate in original coordinates; with ``count_patterns``
    also returns the number of patterns visited (sum of C(k, i), i <= q).
    """
    y = np.asarray(y, dtype=np.float64)
    llr = np.asarray(llr, dtype=np.float64)
    k = code.k
    if q > k:
        raise ValueError(f"q={q} exceeds code dimension {k}")
    sysform = systematize_by_reliability(code.generator, llr)
    gt = sysform.g_tilde.to_array()
    y_perm = y[sysform.perm]
    v0 = (llr[sysform.perm][:k] < 0.0).astype(np.uint8)

    best_cw = None
    best_d = np.inf
    visited = 0
    for w in range(q + 1):
        for pattern in combinations(range(k), w):
            v = v0.copy()
            for i in pattern:
                v[i] ^= 1
            cw = ((v.astype(np.int64) @ gt) & 1).astype(np.uint8)
            d = float(np.sum((y_perm - bpsk(cw)) ** 2))
            visited += 1
            if d < best_d:
                best_d = d
                best_cw = cw
    out = np.empty_like(best_cw)
    out[sysform.perm] = best_cw
    if count_patterns:
        return out, visited
    return out
