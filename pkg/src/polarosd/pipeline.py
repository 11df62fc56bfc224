"""Composite decoders: CBP list selection and the OSD-augmented variants.

Every list decoder runs L CRC-aided BP branches on layer-permuted graphs
sharing one channel observation, then reduces to a single codeword.  The
OSD variants reprocess every branch's soft output (converged or not) and
pick the candidate closest to the channel observation, so their output is
always a valid codeword.  ``decode_suite`` evaluates many decoder configs
on one frame while sharing the BP branches and per-branch OSD contexts;
its results are identical to the standalone entry points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import osd
from .bp import CbpResult, cbp_decode
from .channel import DEFAULT_SAT, ChannelParams, bpsk, channel_llrs
from .codes import CodeSpec
from .polar import layer_permutations

DECODER_KINDS = ("cbp", "cbpl", "cbpl_strict", "cbposd1", "cbplosd1",
                 "cbplosd2", "pcbplosd2", "plainosd")

_OSD_ORDERS = {"cbposd1": 1, "cbplosd1": 1, "cbplosd2": 2, "pcbplosd2": 2}


@dataclass(frozen=True)
class DecoderConfig:
    """One decoder selection plus its BP and reprocessing settings.

    ``alpha`` only applies to pcbplosd2 (fraction of least-reliable pairs),
    ``q`` only to plainosd.
    """

    kind: str
    L: int = 6
    alpha: float = 0.5
    q: int = 2
    i_max: int = 100
    i_thr: int = 50
    kernel: str = "exact"
    sat: float = DEFAULT_SAT

    def __post_init__(self):
        if self.kind not in DECODER_KINDS:
            raise ValueError(f"unknown decoder kind {self.kind!r}")
        if self.L < 1:
            raise ValueError("list size must be at least 1")
        if self.kind == "pcbplosd2" and not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.kind == "plainosd" and self.q not in (0, 1, 2):
            raise ValueError("plain OSD order must be 0, 1 or 2")

    def partial_m(self, m: int) -> int:
        """Pair budget for partial order-2: round(alpha * C(m, 2)), >= 1."""
        pairs = round(self.alpha * math.comb(m, 2))
        if pairs < 1:
            raise ValueError(f"alpha={self.alpha} yields no pairs for m={m}")
        return pairs

    def branch_count(self) -> int:
        return 1 if self.kind in ("cbp", "cbposd1", "plainosd") else self.L

    def bp_settings(self) -> tuple:
        return (self.i_max, self.i_thr, self.kernel, self.sat)


class CbplResult(NamedTuple):
    """CBPL selection: the chosen codeword, whether any branch converged
    (False means the minimum-distance hard-decision fallback was used),
    and the winning branch index."""

    codeword: np.ndarray
    any_converged: bool
    branch: int


def run_cbp_branches(llr_ch, code: CodeSpec, cfg: DecoderConfig,
                     n_branches: int | None = None) -> list[CbpResult]:
    """The L parallel CBP decodes (identity permutation first)."""
    count = cfg.branch_count() if n_branches is None else n_branches
    perms = layer_permutations(code.n, count)
    return [cbp_decode(llr_ch, code, sigma, i_max=cfg.i_max, i_thr=cfg.i_thr,
                       kernel=cfg.kernel, sat=cfg.sat) for sigma in perms]


def _dist2(y: np.ndarray, codeword: np.ndarray) -> float:
    d = y - bpsk(codeword)
    return float(d @ d)


def select_cbpl(y, branches: list[CbpResult]) -> CbplResult:
    """Minimum-distance valid output; hard-decision fallback if none
    converged (flagged so FER accounting can treat it either way)."""
    y = np.asarray(y, dtype=np.float64)
    converged = [j for j, b in enumerate(branches) if b.converged]
    pool = converged if converged else range(len(branches))
    dists = [_dist2(y, branches[j].x_hat) for j in pool]
    best = list(pool)[int(np.argmin(dists))]
    return CbplResult(codeword=branches[best].x_hat.copy(),
                      any_converged=bool(converged), branch=best)


def decode_cbpl(y, cfg: DecoderConfig, code: CodeSpec,
                chan: ChannelParams) -> CbplResult:
    """CBP list decoding of one frame."""
    llr = channel_llrs(y, chan.sigma2, cfg.sat)
    return select_cbpl(y, run_cbp_branches(llr, code, cfg))


def _osd_branch_candidates(y, contexts, order: int, partial_m: int | None):
    out = []
    for ctx in contexts:
        cand = osd._best_candidate(ctx, order, partial_m)
        cw = np.empty_like(cand.codeword)
        cw[ctx.sys.perm] = cand.codeword
        out.append((cw, _dist2(y, cw)))
    return out


def decode_cbplosd(y, cfg: DecoderConfig, code: CodeSpec,
                   chan: ChannelParams) -> np.ndarray:
    """OSD reprocessing of every CBP branch, minimum-distance selection."""
    if cfg.kind not in _OSD_ORDERS:
        raise ValueError(f"{cfg.kind!r} is not an OSD-augmented decoder")
    llr = channel_llrs(y, chan.sigma2, cfg.sat)
    branches = run_cbp_branches(llr, code, cfg)
    contexts = [osd.build_context(code.g_aug, b.soft_out, y) for b in branches]
    order = _OSD_ORDERS[cfg.kind]
    partial = cfg.partial_m(code.m) if cfg.kind == "pcbplosd2" else None
    cands = _osd_branch_candidates(np.asarray(y, float), contexts, order, partial)
    best = int(np.argmin([d for _, d in cands]))
    return cands[best][0]


def decode_plain_osd(y, cfg: DecoderConfig, code: CodeSpec,
                     chan: ChannelParams) -> np.ndarray:
    """OSD(q) directly on the channel LLRs (no BP)."""
    llr = channel_llrs(y, chan.sigma2, cfg.sat)
    return osd.decode_osd(code.g_aug, llr, y, cfg.q)


class FrameOutcome(NamedTuple):
    codeword: np.ndarray
    dist2: float
    converged_any: bool | None
    iters_total: int
    n_branches: int


def decode_suite(y, llr_ch, cfgs: dict[str, DecoderConfig], code: CodeSpec
                 ) -> tuple[dict[str, FrameOutcome], list[CbpResult]]:
    """Evaluate several decoders on one frame, sharing BP branches and OSD
    contexts.  All BP-based configs must agree on their BP settings.

    Returns the per-decoder outcomes plus the shared branch results (empty
    list when no decoder runs BP).
    """
    y = np.asarray(y, dtype=np.float64)
    bp_cfgs = [c for c in cfgs.values() if c.kind != "plainosd"]
    settings = {c.bp_settings() for c in bp_cfgs}
    if len(settings) > 1:
        raise ValueError("decoders in one suite must share BP settings")

    branches: list[CbpResult] = []
    contexts: list = []
    if bp_cfgs:
        n_branches = max(c.branch_count() for c in bp_cfgs)
        branches = run_cbp_branches(llr_ch, code, bp_cfgs[0], n_branches)
    needs_osd = max((c.branch_count() for c in cfgs.values()
                     if c.kind in _OSD_ORDERS), default=0)
    if needs_osd:
        contexts = [osd.build_context(code.g_aug, b.soft_out, y)
                    for b in branches[:needs_osd]]

    outcomes: dict[str, FrameOutcome] = {}
    for name, cfg in cfgs.items():
        nb = cfg.branch_count()
        iters = sum(b.iters_used for b in branches[:nb])
        if cfg.kind == "cbp":
            b = branches[0]
            outcomes[name] = FrameOutcome(b.x_hat, _dist2(y, b.x_hat),
                                          b.converged, iters, nb)
        elif cfg.kind in ("cbpl", "cbpl_strict"):
            res = select_cbpl(y, branches[:nb])
            outcomes[name] = FrameOutcome(res.codeword,
                                          _dist2(y, res.codeword),
                                          res.any_converged, iters, nb)
        elif cfg.kind in _OSD_ORDERS:
            order = _OSD_ORDERS[cfg.kind]
            partial = cfg.partial_m(code.m) if cfg.kind == "pcbplosd2" else None
            cands = _osd_branch_candidates(y, contexts[:nb], order, partial)
            best = int(np.argmin([d for _, d in cands]))
            conv = any(b.converged for b in branches[:nb])
            outcomes[name] = FrameOutcome(cands[best][0], cands[best][1],
                                          conv, iters, nb)
        else:  # plainosd
            cw = decode_plain_osd_from_llr(y, llr_ch, cfg, code)
            outcomes[name] = FrameOutcome(cw, _dist2(y, cw), None, 0, 0)
    return outcomes, branches


def decode_plain_osd_from_llr(y, llr_ch, cfg: DecoderConfig,
                              code: CodeSpec) -> np.ndarray:
    return osd.decode_osd(code.g_aug, llr_ch, y, cfg.q)
