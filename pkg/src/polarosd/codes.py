"""CRC-augmented polar code assembly.

Binds the polar information set and the CRC together: the K = m + r bits
of the CRC codeword occupy the information set in ascending index order,
and the augmented generator is g_aug = g_crc @ G_N(A) with dimension m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import crc as crcmod
from . import gf2, polar


@dataclass
class CodeSpec:
    """Everything a decoder needs about one CRC-augmented polar code."""

    polar: polar.PolarParams
    crc: crcmod.CrcSpec
    g_aug: gf2.BitMatrix
    _h_aug: gf2.BitMatrix | None = field(default=None, repr=False)
    _attachments: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.polar.n

    @property
    def N(self) -> int:
        return self.polar.N

    @property
    def m(self) -> int:
        return self.crc.m

    @property
    def r(self) -> int:
        return self.crc.r

    @property
    def K(self) -> int:
        return self.crc.k

    @property
    def rate(self) -> float:
        """Overall rate m/N; CRC bits count as overhead."""
        return self.m / self.N

    @property
    def info_set(self) -> np.ndarray:
        return self.polar.info_set

    def frozen_mask(self) -> np.ndarray:
        return self.polar.frozen_mask()

    def h_aug(self) -> gf2.BitMatrix:
        """Parity-check matrix of the augmented code (built on first use)."""
        if self._h_aug is None:
            self._h_aug = gf2.nullspace(self.g_aug)
        return self._h_aug

    def is_codeword(self, x) -> bool:
        x = np.asarray(x, dtype=np.uint8) & 1
        syndrome = self.h_aug().to_array() @ x.astype(np.int64)
        return not np.any(syndrome & 1)


def build_code_spec(n: int, m: int, crc_poly=crcmod.G6_POLY,
                    design_ebn0_db: float = 2.5,
                    info_set: np.ndarray | None = None) -> CodeSpec:
    """Construct a CRC-augmented polar code.

    The information set defaults to the GA construction at the given design
    Eb/N0, converted with the overall rate m/N; pass ``info_set`` (0-based)
    to pin an explicit construction instead.
    """
    if isinstance(crc_poly, str):
        crc_poly = crcmod.parse_poly(crc_poly)
    crc = crcmod.CrcSpec(poly=crc_poly, m=m)
    N = 1 << n
    if crc.k > N:
        raise ValueError(f"K={crc.k} exceeds blocklength {N}")
    if info_set is not None:
        params = polar.PolarParams(n=n, N=N, info_set=np.sort(np.asarray(info_set)))
        if params.K != crc.k:
            raise ValueError(f"information set has {params.K} indices, need {crc.k}")
    else:
        params = polar.select_info_set(n, crc.k, design_ebn0_db, rate=m / N)
    g_n_rows = polar.kron_generator(n).to_array()[params.info_set]
    g_na = gf2.BitMatrix.from_array(g_n_rows)
    g_aug = gf2.multiply(gf2.BitMatrix.from_array(crc.g), g_na)
    return CodeSpec(polar=params, crc=crc, g_aug=g_aug)


def encode_frame(msg, code: CodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """CRC-encode a message, map it onto the information set, polar-encode.

    Returns (u, x): the length-N input vector and the codeword.
    """
    word = crcmod.crc_encode(msg, code.crc)
    u = np.zeros(code.N, dtype=np.uint8)
    u[code.info_set] = word
    return u, polar.polar_encode(u, code.polar)
