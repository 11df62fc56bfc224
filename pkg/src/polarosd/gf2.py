"""Dense GF(2) linear algebra on word-packed bit matrices.

Matrices are stored row-major with 64 bits per machine word; the external
view is always a plain 0/1 numpy array.  Includes the reliability-sorted
Gaussian elimination that extracts a most-reliable independent basis and
reduces a generator to systematic form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_WORD = 64


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into little-endian 64-bit words."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8) & 1
    rows, cols = bits.shape
    nwords = (cols + _WORD - 1) // _WORD
    padded = np.zeros((rows, nwords * _WORD), dtype=np.uint8)
    padded[:, :cols] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(rows, nwords)


def _unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    raw = np.unpackbits(np.ascontiguousarray(words).view(np.uint8), axis=1,
                        bitorder="little")
    return np.ascontiguousarray(raw[:, :cols])


class BitMatrix:
    """Immutable dense GF(2) matrix.

    Construct with :meth:`from_array`, :meth:`zeros` or :meth:`identity`;
    the packed word layout is internal only.
    """

    __slots__ = ("rows", "cols", "_words")

    def __init__(self, words: np.ndarray, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ValueError("BitMatrix must have at least one row and column")
        self.rows = rows
        self.cols = cols
        self._words = words
        words.setflags(write=False)

    @classmethod
    def from_array(cls, array) -> "BitMatrix":
        arr = np.atleast_2d(np.asarray(array, dtype=np.uint8))
        return cls(_pack_bits(arr), arr.shape[0], arr.shape[1])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        nwords = (cols + _WORD - 1) // _WORD
        return cls(np.zeros((rows, nwords), dtype=np.uint64), rows, cols)

    @classmethod
    def identity(cls, k: int) -> "BitMatrix":
        return cls.from_array(np.eye(k, dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        return _unpack_bits(self._words, self.cols)

    def row(self, i: int) -> np.ndarray:
        return _unpack_bits(self._words[i : i + 1], self.cols)[0]

    def __eq__(self, other) -> bool:
        return (isinstance(other, BitMatrix)
                and self.rows == other.rows
                and self.cols == other.cols
                and np.array_equal(self._words, other._words))

    def __hash__(self):
        return hash((self.rows, self.cols, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


@dataclass(frozen=True)
class SystematicForm:
    """Result of reliability-sorted elimination: ``g_tilde = [I_k | A]``.

    ``perm`` maps new column positions to original ones (``perm[j]`` is the
    original index of column ``j``); ``mrib`` lists the k chosen basis
    columns by original index, in decreasing reliability order.
    """

    g_tilde: BitMatrix
    perm: np.ndarray
    mrib: np.ndarray


@njit(cache=True)
def _eliminate(W: np.ndarray, ncols: int, piv_out: np.ndarray) -> int:
    """In-place Gauss-Jordan over packed rows, scanning columns left to right.

    Fills ``piv_out`` with the pivot column positions and returns the rank.
    """
    k, nw = W.shape
    f = 0
    for p in range(ncols):
        w = p >> 6
        mask = np.uint64(1) << np.uint64(p & 63)
        pr = -1
        for i in range(f, k):
            if W[i, w] & mask:
                pr = i
                break
        if pr < 0:
            continue
        if pr != f:
            for t in range(nw):
                tmp = W[f, t]
                W[f, t] = W[pr, t]
                W[pr, t] = tmp
        for i in range(k):
            if i != f and (W[i, w] & mask):
                for t in range(nw):
                    W[i, t] ^= W[f, t]
        piv_out[f] = p
        f += 1
        if f == k:
            break
    return f


@njit(cache=True)
def _gather_columns(W: np.ndarray, order: np.ndarray) -> np.ndarray:
    k = W.shape[0]
    out = np.empty((k, order.size), dtype=np.uint8)
    for j in range(order.size):
        p = order[j]
        w = p >> 6
        b = np.uint64(p & 63)
        for i in range(k):
            out[i, j] = (W[i, w] >> b) & np.uint64(1)
    return out


def multiply(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Mod-2 matrix product ``a @ b``."""
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.cols} != {b.rows}")
    a_bits = a.to_array().astype(bool)
    out = np.zeros((a.rows, b._words.shape[1]), dtype=np.uint64)
    for i in range(a.rows):
        sel = a_bits[i]
        if sel.any():
            out[i] = np.bitwise_xor.reduce(b._words[sel], axis=0)
    return BitMatrix(out, a.rows, b.cols)


def encode_row(v, g: BitMatrix) -> np.ndarray:
    """Row-vector/matrix product ``v @ g`` over GF(2), returned as 0/1 array."""
    v = np.asarray(v, dtype=np.uint8) & 1
    if v.ndim != 1 or v.size != g.rows:
        raise ValueError(f"length mismatch: {v.size} != {g.rows}")
    sel = v.astype(bool)
    if not sel.any():
        return np.zeros(g.cols, dtype=np.uint8)
    words = np.bitwise_xor.reduce(g._words[sel], axis=0)
    return _unpack_bits(words[None, :], g.cols)[0]


def systematize_by_reliability(g: BitMatrix, reliab) -> SystematicForm:
    """Reduce ``g`` to ``[I_k | A]`` after sorting columns by |reliability|.

    Columns are stably ordered by decreasing ``|reliab|`` (ties keep the
    lower original index first).  Elimination picks the first k linearly
    independent columns as the basis and moves them to the front; dependent
    columns slide behind them keeping their relative order, so the returned
    ``perm`` is a full permutation of all column positions.

    Raises ``ValueError`` if ``g`` is rank deficient.
    """
    reliab = np.asarray(reliab, dtype=np.float64)
    if reliab.ndim != 1 or reliab.size != g.cols:
        raise ValueError(f"reliability length mismatch: {reliab.size} != {g.cols}")
    order = np.argsort(-np.abs(reliab), kind="stable")
    W = _pack_bits(g.to_array()[:, order])
    piv = np.empty(g.rows, dtype=np.int64)
    rank = _eliminate(W, g.cols, piv)
    if rank < g.rows:
        raise ValueError(f"rank-deficient generator: rank {rank} < {g.rows} rows")
    in_basis = np.zeros(g.cols, dtype=bool)
    in_basis[piv] = True
    new_order = np.concatenate([piv, np.flatnonzero(~in_basis)])
    g_tilde = BitMatrix.from_array(_gather_columns(W, new_order))
    return SystematicForm(g_tilde=g_tilde, perm=order[new_order], mrib=order[piv])


def rank(g: BitMatrix) -> int:
    """GF(2) rank."""
    W = g._words.copy()
    piv = np.empty(g.rows, dtype=np.int64)
    return _eliminate(W, g.cols, piv)


def nullspace(g: BitMatrix) -> BitMatrix:
    """Basis for the right null space: rows h with ``g @ h.T = 0``.

    Used to syndrome-check membership in the row space of a generator.
    """
    W = g._words.copy()
    piv = np.empty(g.rows, dtype=np.int64)
    r = _eliminate(W, g.cols, piv)
    piv = piv[:r]
    reduced = _unpack_bits(W, g.cols)
    free = np.setdiff1d(np.arange(g.cols), piv)
    if free.size == 0:
        raise ValueError("generator has full column rank; null space is trivial")
    basis = np.zeros((free.size, g.cols), dtype=np.uint8)
    for t, c in enumerate(free):
        basis[t, c] = 1
        basis[t, piv] = reduced[:r, c]
    return BitMatrix.from_array(basis)


def save_matrix(m: BitMatrix, path) -> None:
    """Write a matrix as text: "rows cols" header then one 0/1 row per line."""
    bits = m.to_array()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{m.rows} {m.cols}\n")
        for row in bits:
            fh.write("".join("1" if b else "0" for b in row) + "\n")


def load_matrix(path) -> BitMatrix:
    """Read a matrix saved by :func:`save_matrix`."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        rows, cols = int(header[0]), int(header[1])
        bits = np.zeros((rows, cols), dtype=np.uint8)
        for i in range(rows):
            line = fh.readline().strip()
            if len(line) != cols:
                raise ValueError(f"row {i} has {len(line)} bits, expected {cols}")
            bits[i] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")
    return BitMatrix.from_array(bits)
