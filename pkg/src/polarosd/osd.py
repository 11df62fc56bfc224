"""Ordered statistics decoding around a most-reliable independent basis.

The context ties together the reliability-sorted systematic generator, the
permuted observations, the hard-decision base codeword, and the signed
observation vector s used by the correlation form of the reprocessing
search.  Maximizing the correlation sum over flip patterns is equivalent
to minimizing Euclidean distance to the permuted observation.

Order-2 search is available in full matrix form (all pairs at once) and as
partial reprocessing restricted to the M least-reliable pairs, enumerated
with the outer index descending from the least reliable end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf2 import BitMatrix, SystematicForm, systematize_by_reliability


@dataclass
class OsdContext:
    """Per-decode working set in permuted (reliability-sorted) coordinates."""

    sys: SystematicForm
    y_perm: np.ndarray
    l_perm: np.ndarray
    v_hat: np.ndarray
    x_bar: np.ndarray
    s: np.ndarray
    _gt: np.ndarray = field(default=None, repr=False)
    _signs: np.ndarray = field(default=None, repr=False)
    _order1: "Candidate" = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.sys.g_tilde.rows

    @property
    def g_rows(self) -> np.ndarray:
        """Systematic generator rows as a dense 0/1 array."""
        if self._gt is None:
            self._gt = self.sys.g_tilde.to_array()
        return self._gt

    @property
    def signs(self) -> np.ndarray:
        """(-1)^g for every generator row, as float rows."""
        if self._signs is None:
            self._signs = 1.0 - 2.0 * self.g_rows.astype(np.float64)
        return self._signs


@dataclass(frozen=True)
class Candidate:
    """A reprocessing candidate: flipped basis positions (0-based, at most
    two), its correlation score against s, and the permuted codeword."""

    pattern: tuple
    score: float
    codeword: np.ndarray


def build_context(g_aug: BitMatrix, llr, y) -> OsdContext:
    """Sort by |llr|, reduce to systematic form, take hard decisions.

    ``llr`` ranks the code bits (typically a BP soft output); ``y`` is the
    raw channel observation the candidates are scored against.
    """
    llr = np.asarray(llr, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if llr.size != g_aug.cols or y.size != g_aug.cols:
        raise ValueError("llr/y length must match the generator width")
    sysform = systematize_by_reliability(g_aug, llr)
    l_perm = llr[sysform.perm]
    y_perm = y[sysform.perm]
    v_hat = (l_perm[: g_aug.rows] < 0.0).astype(np.uint8)
    gt = sysform.g_tilde.to_array()
    x_bar = ((v_hat.astype(np.int64) @ gt) & 1).astype(np.uint8)
    return OsdContext(sys=sysform, y_perm=y_perm, l_perm=l_perm, v_hat=v_hat,
                      x_bar=x_bar, s=y_perm * (1.0 - 2.0 * x_bar), _gt=gt)


def _order1_scores(ctx: OsdContext) -> np.ndarray:
    """Scores for the no-flip pattern and each single flip (index i = rows
    shifted by one; entry 0 is pattern {})."""
    scores = np.empty(ctx.k + 1)
    scores[0] = ctx.s.sum()
    scores[1:] = ctx.signs @ ctx.s
    return scores


def _candidate(ctx: OsdContext, pattern: tuple, score: float) -> Candidate:
    cw = ctx.x_bar.copy()
    for i in pattern:
        cw ^= ctx.g_rows[i]
    return Candidate(pattern=pattern, score=float(score), codeword=cw)


def reprocess_order1(ctx: OsdContext) -> Candidate:
    """Best candidate among the no-flip pattern and all single flips.

    Ties keep the fewest flips, then the smallest index (first maximum).
    Cached on the context, so repeated reprocessing passes share it.
    """
    if ctx._order1 is None:
        scores = _order1_scores(ctx)
        best = int(np.argmax(scores))
        pattern = () if best == 0 else (best - 1,)
        ctx._order1 = _candidate(ctx, pattern, scores[best])
    return ctx._order1


def reprocess_order1_reference(ctx: OsdContext) -> tuple[Candidate, int]:
    """Non-vectorized order-1 scoring that counts additions/subtractions.

    Each of the k+1 correlation sums accumulates N signed terms with N-1
    additions, so the returned count is exactly (N-1)(k+1).
    """
    k = ctx.k
    N = ctx.s.size
    g = ctx.g_rows
    additions = 0
    best_score = 0.0
    best = 0
    for i in range(k + 1):
        row = None if i == 0 else g[i - 1]
        acc = -ctx.s[0] if (row is not None and row[0]) else ctx.s[0]
        for l in range(1, N):
            term = -ctx.s[l] if (row is not None and row[l]) else ctx.s[l]
            acc += term
            additions += 1
        if i == 0 or acc > best_score:
            best_score = acc
            best = i
    pattern = () if best == 0 else (best - 1,)
    return _candidate(ctx, pattern, best_score), additions


def _pair_score_matrix(ctx: OsdContext, row_start: int = 0) -> np.ndarray:
    """C[i, j] = sum_l s_l (-1)^{g^i_l} (-1)^{g^j_l} for rows >= row_start.

    Equals A @ B with A the s-weighted sign rows and B the sign columns.
    """
    a = ctx.signs[row_start:] * ctx.s
    return a @ ctx.signs.T


@lru_cache(maxsize=8)
def _upper_pairs(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(k, 1)


def reprocess_order2_full(ctx: OsdContext) -> Candidate:
    """Best double-flip candidate over all k(k-1)/2 pairs (pairs only; the
    comparison against the order-1 winner happens in decode_osd)."""
    if ctx.k < 2:
        raise ValueError("order-2 reprocessing needs at least 2 basis rows")
    c = _pair_score_matrix(ctx)
    ii, jj = _upper_pairs(ctx.k)
    scores = c[ii, jj]
    best = int(np.argmax(scores))
    return _candidate(ctx, (int(ii[best]), int(jj[best])), scores[best])


@lru_cache(maxsize=8)
def _partial_pairs(k: int, m_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    """First m_pairs of the partial enumeration: outer i = k-2 down to 0,
    inner j = k-1 down to i+1 (0-based)."""
    ii = np.empty(m_pairs, dtype=np.int64)
    jj = np.empty(m_pairs, dtype=np.int64)
    t = 0
    for i in range(k - 2, -1, -1):
        for j in range(k - 1, i, -1):
            ii[t] = i
            jj[t] = j
            t += 1
            if t == m_pairs:
                return ii, jj
    return ii, jj


def reprocess_order2_partial(ctx: OsdContext, m_pairs: int,
                             pair_scores: np.ndarray | None = None) -> Candidate:
    """Best candidate among the M least-reliable pairs.

    With the basis sorted by decreasing reliability, the pairs with the
    lowest |l_i| + |l_j| are enumerated by walking the outer index down
    from k-1 (1-based k-1 equals 0-based k-2) and the inner index down
    from k, stopping after exactly M pairs.  ``pair_scores`` may supply an
    already-computed full score matrix to read from.
    """
    k = ctx.k
    limit = k * (k - 1) // 2
    if not 1 <= m_pairs <= limit:
        raise ValueError(f"M={m_pairs} out of range 1..{limit}")
    ii, jj = _partial_pairs(k, m_pairs)
    if pair_scores is not None:
        scores = pair_scores[ii, jj]
    else:
        row_start = int(ii.min())
        c = _pair_score_matrix(ctx, row_start)
        scores = c[ii - row_start, jj]
    top = scores.max()
    tied = np.flatnonzero(scores == top)
    best = tied[np.lexsort((jj[tied], ii[tied]))[0]]
    return _candidate(ctx, (int(ii[best]), int(jj[best])), scores[best])


def decode_osd(g_aug: BitMatrix, llr, y, order: int,
               partial_m: int | None = None) -> np.ndarray:
    """OSD(order) estimate in original coordinates: always a codeword.

    Reprocessing is cumulative: order 2 compares its best pair against the
    order-1 winner (which already includes the no-flip pattern).  With
    ``partial_m`` the pair search visits only that many least-reliable
    pairs.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    ctx = build_context(g_aug, llr, y)
    best = _best_candidate(ctx, order, partial_m)
    out = np.empty_like(best.codeword)
    out[ctx.sys.perm] = best.codeword
    return out


def _best_candidate(ctx: OsdContext, order: int,
                    partial_m: int | None = None,
                    pair_scores: np.ndarray | None = None) -> Candidate:
    if order == 0:
        return _candidate(ctx, (), ctx.s.sum())
    best = reprocess_order1(ctx)
    if order == 2:
        if partial_m is None:
            pair = reprocess_order2_full(ctx)
        else:
            pair = reprocess_order2_partial(ctx, partial_m, pair_scores)
        if pair.score > best.score:
            best = pair
    return best
