"""CRC codes viewed as systematic linear block codes.

A CRC with generator polynomial of degree r maps m message bits to
m + r bits by appending the remainder of msg(x) * x^r modulo the
polynomial.  Plain polynomial arithmetic only: no bit reflection and no
initial/final register XOR.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: x^6 + x^5 + 1, the 6-bit polynomial used by the reference experiments.
G6_POLY = "1100001"


def parse_poly(text: str) -> np.ndarray:
    """Parse a generator polynomial from a binary string or 0x-prefixed hex.

    Coefficients are highest degree first, e.g. "1100001" or "0x61" for
    x^6 + x^5 + 1.
    """
    text = text.strip()
    if text.lower().startswith("0x"):
        value = int(text, 16)
        bits = bin(value)[2:]
    else:
        if set(text) - {"0", "1"}:
            raise ValueError(f"polynomial must be binary or 0x-hex: {text!r}")
        bits = text
    poly = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    if poly.size < 2:
        raise ValueError("polynomial degree must be at least 1")
    return poly.copy()


def _remainder(bits: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Remainder of bits(x) * x^r modulo poly(x), highest degree first."""
    r = poly.size - 1
    rem = np.zeros(r, dtype=np.uint8)
    taps = poly[1:]
    for b in bits:
        feedback = b ^ rem[0]
        rem[:-1] = rem[1:]
        rem[-1] = 0
        if feedback:
            rem ^= taps
    return rem


@dataclass
class CrcSpec:
    """CRC parameters plus the derived generator/parity-check matrices.

    ``g`` is the m x (m+r) systematic generator [I_m | P]; ``h`` is the
    r x (m+r) parity-check matrix [P^T | I_r], so g @ h.T = 0.
    """

    poly: np.ndarray
    m: int
    r: int = field(init=False)
    g: np.ndarray = field(init=False, repr=False)
    h: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.poly = np.asarray(self.poly, dtype=np.uint8) & 1
        if self.poly.ndim != 1 or self.poly.size < 2:
            raise ValueError("polynomial must have degree >= 1")
        if self.poly[0] != 1 or self.poly[-1] != 1:
            raise ValueError("polynomial needs leading and constant coefficients of 1")
        if self.m < 1:
            raise ValueError("message length must be positive")
        self.r = self.poly.size - 1
        parity = np.empty((self.m, self.r), dtype=np.uint8)
        for i in range(self.m):
            e = np.zeros(self.m, dtype=np.uint8)
            e[i] = 1
            parity[i] = _remainder(e, self.poly)
        self.g = np.concatenate([np.eye(self.m, dtype=np.uint8), parity], axis=1)
        self.h = np.concatenate([parity.T, np.eye(self.r, dtype=np.uint8)], axis=1)

    @property
    def k(self) -> int:
        """Total encoded length m + r."""
        return self.m + self.r

    @property
    def rate(self) -> float:
        return self.m / (self.m + self.r)


def crc_encode(msg, spec: CrcSpec) -> np.ndarray:
    """Append the r parity bits: returns [msg | parity] of length m + r."""
    msg = np.asarray(msg, dtype=np.uint8) & 1
    if msg.ndim != 1 or msg.size != spec.m:
        raise ValueError(f"message length mismatch: {msg.size} != {spec.m}")
    return np.concatenate([msg, _remainder(msg, spec.poly)])


def crc_check(word, spec: CrcSpec) -> bool:
    """True iff word @ h.T = 0, i.e. the word re-encodes to itself."""
    word = np.asarray(word, dtype=np.uint8) & 1
    if word.ndim != 1 or word.size != spec.k:
        raise ValueError(f"word length mismatch: {word.size} != {spec.k}")
    return not np.any((spec.h @ word.astype(np.int64)) & 1)
