"""BPSK over the binary-input AWGN channel and channel LLRs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Saturation magnitude for channel and message LLRs.  exp(40) dwarfs any
#: achievable likelihood ratio at simulated SNRs and stands in for the
#: infinite frozen-bit prior.
DEFAULT_SAT = 40.0


@dataclass(frozen=True)
class ChannelParams:
    """Eb/N0 operating point; sigma2 is the noise variance N0/2 for
    unit-energy BPSK at overall rate ``rate``."""

    ebn0_db: float
    rate: float
    sigma2: float

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelParams":
        if rate <= 0:
            raise ValueError("rate must be positive")
        sigma2 = 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))
        return cls(ebn0_db=ebn0_db, rate=rate, sigma2=sigma2)


def bpsk(x) -> np.ndarray:
    """Map bit 0 to +1.0 and bit 1 to -1.0."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def awgn(symbols, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. Gaussian noise of variance sigma2 (deterministic per rng)."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    symbols = np.asarray(symbols, dtype=np.float64)
    return symbols + np.sqrt(sigma2) * rng.standard_normal(symbols.size)


def channel_llrs(y, sigma2: float, sat: float = DEFAULT_SAT) -> np.ndarray:
    """LLR of each bit from its observation: 2*y/sigma2, clipped to +-sat."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return np.clip(2.0 * np.asarray(y, dtype=np.float64) / sigma2, -sat, sat)
