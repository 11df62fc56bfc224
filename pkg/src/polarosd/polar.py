"""Polar code construction, encoding, and factor-graph layer permutations.

The generator is the n-fold Kronecker power of [[1,0],[1,1]] with natural
(non bit-reversed) indexing: stage s of the encoding butterfly couples
index pairs differing in bit s.  Information sets come from a
Gaussian-approximation density evolution, overridable from a file.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gf2 import BitMatrix


@dataclass(frozen=True)
class PolarParams:
    """Blocklength and information set of a polar code.

    ``info_set`` holds 0-based indices sorted ascending; documentation and
    all external files use 1-based indices.
    """

    n: int
    N: int
    info_set: np.ndarray

    def __post_init__(self):
        if self.N != 1 << self.n:
            raise ValueError(f"N={self.N} is not 2^{self.n}")
        a = np.asarray(self.info_set, dtype=np.int64)
        if a.size < 1 or a.size > self.N:
            raise ValueError("information set size out of range")
        if np.any(np.diff(a) <= 0) or a[0] < 0 or a[-1] >= self.N:
            raise ValueError("information set must be sorted, unique, in range")
        object.__setattr__(self, "info_set", a)

    @property
    def K(self) -> int:
        return int(self.info_set.size)

    @property
    def frozen_set(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.N), self.info_set)

    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_set] = False
        return mask


def kron_generator(n: int) -> BitMatrix:
    """The N x N transform F^(x n), lower triangular with F = [[1,0],[1,1]]."""
    if n < 1:
        raise ValueError("n must be at least 1")
    idx = np.arange(1 << n)
    bits = ((idx[:, None] & idx[None, :]) == idx[None, :]).astype(np.uint8)
    return BitMatrix.from_array(bits)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """In-place butterfly u @ G_N (involutory), no frozen-bit validation."""
    x = np.asarray(u, dtype=np.uint8).copy()
    N = x.size
    n = N.bit_length() - 1
    if N != 1 << n:
        raise ValueError(f"length {N} is not a power of two")
    for s in range(n):
        h = 1 << s
        v = x.reshape(-1, 2 * h)
        v[:, :h] ^= v[:, h:]
    return x


def polar_encode(u, params: PolarParams) -> np.ndarray:
    """Encode a length-N vector whose frozen positions must all be zero."""
    u = np.asarray(u, dtype=np.uint8) & 1
    if u.size != params.N:
        raise ValueError(f"length mismatch: {u.size} != {params.N}")
    if np.any(u[params.frozen_mask()]):
        raise ValueError("nonzero bit in a frozen position")
    return polar_transform(u)


# Gaussian-approximation density evolution.

def _phi(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.ones_like(x)
    small = (x > 0) & (x < 10.0)
    large = x >= 10.0
    out[small] = np.exp(0.0218 - 0.4527 * x[small] ** 0.86)
    xl = x[large]
    out[large] = np.sqrt(np.pi / xl) * np.exp(-xl / 4.0) * (1.0 - 10.0 / (7.0 * xl))
    return out


_PHI_AT_10 = float(_phi(np.array([10.0]))[0])


def _phi_inv_scalar(y: float) -> float:
    if y >= 1.0:
        return 0.0
    if y > _PHI_AT_10:
        return ((0.0218 - math.log(y)) / 0.4527) ** (1.0 / 0.86)
    lo, hi = 10.0, 10.0
    while float(_phi(np.array([hi]))[0]) > y:
        hi *= 2.0
        if hi > 1e9:
            return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(_phi(np.array([mid]))[0]) > y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


def gaussian_mean_llrs(n: int, design_ebn0_db: float, rate: float) -> np.ndarray:
    """Mean LLR of each synthetic channel for a BIAWGNC at the design point.

    Levels are processed from the coarsest stage down so that the result
    follows the natural F^(x n) indexing (channel for u_i composes the
    check-branch for each zero bit of i, outermost at bit 0).
    """
    N = 1 << n
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (design_ebn0_db / 10.0))
    means = np.full(N, 2.0 / sigma2)
    for level in range(n - 1, -1, -1):
        step = 1 << (level + 1)
        half = step >> 1
        blocks = means.reshape(-1, step)
        t = blocks[:, :half].copy()
        y = 1.0 - (1.0 - _phi(t)) ** 2
        blocks[:, :half] = np.vectorize(_phi_inv_scalar)(y)
        blocks[:, half:] = 2.0 * t
    return means


def select_info_set(n: int, K: int, design_ebn0_db: float,
                    rate: float | None = None) -> PolarParams:
    """Pick the K most reliable synthetic channels by GA density evolution.

    ``rate`` fixes the Eb/N0-to-noise conversion at the design point and
    defaults to K/N.  Ties in the mean break toward the higher index.
    """
    N = 1 << n
    if not 1 <= K <= N:
        raise ValueError(f"K={K} out of range for N={N}")
    if rate is None:
        rate = K / N
    means = gaussian_mean_llrs(n, design_ebn0_db, rate)
    order = sorted(range(N), key=lambda i: (-means[i], -i))
    return PolarParams(n=n, N=N, info_set=np.sort(np.array(order[:K])))


def bit_index_permutation(sigma, n: int) -> np.ndarray:
    """Index permutation induced by a factor-graph layer permutation.

    Returns pi with pi[x] = sum_t bit_t(x) << sigma[t]: the index whose
    digit at position sigma[t] equals digit t of x.  The identity sigma
    yields the identity map.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    if sorted(sigma.tolist()) != list(range(n)):
        raise ValueError(f"sigma must be a permutation of 0..{n - 1}")
    x = np.arange(1 << n)
    pi = np.zeros(1 << n, dtype=np.int64)
    for t in range(n):
        pi |= ((x >> t) & 1) << int(sigma[t])
    return pi


def layer_permutations(n: int, L: int) -> list[tuple[int, ...]]:
    """The identity plus permutations of the three right-most layers.

    Right-most means the stages adjacent to the codeword side (bits
    n-3, n-2, n-1).  For L = 6 this is the full 3! set; smaller L takes a
    prefix with the identity first.
    """
    if L < 1:
        raise ValueError("list size must be at least 1")
    if L == 1:
        return [tuple(range(n))]
    if n < 3 or L > 6:
        raise ValueError("permutation lists beyond the identity need n >= 3 and L <= 6")
    base = tuple(range(n - 3))
    top = (n - 3, n - 2, n - 1)
    perms = [base + p for p in itertools.permutations(top)]
    identity = tuple(range(n))
    perms.remove(identity)
    return ([identity] + perms)[:L]


def write_info_set(params: PolarParams, path) -> None:
    """Write the information set, one 1-based index per line."""
    with open(path, "w", encoding="ascii") as fh:
        for i in params.info_set:
            fh.write(f"{int(i) + 1}\n")


def read_info_set(path, n: int) -> PolarParams:
    """Read a 1-based information-set file (any order)."""
    with open(path, "r", encoding="ascii") as fh:
        idx = [int(line) - 1 for line in fh if line.strip()]
    return PolarParams(n=n, N=1 << n, info_set=np.sort(np.array(idx, dtype=np.int64)))


def read_reliability_order(path) -> np.ndarray:
    """Read a reliability order file (1-based, most reliable first)."""
    with open(path, "r", encoding="ascii") as fh:
        idx = np.array([int(line) - 1 for line in fh if line.strip()], dtype=np.int64)
    if np.unique(idx).size != idx.size:
        raise ValueError("reliability order contains duplicate indices")
    return idx


def info_set_from_reliability(order: np.ndarray, n: int, K: int) -> PolarParams:
    """Take the K most reliable indices from an explicit reliability order."""
    N = 1 << n
    if order.size != N:
        raise ValueError(f"reliability order has {order.size} entries, expected {N}")
    return PolarParams(n=n, N=N, info_set=np.sort(order[:K].copy()))
