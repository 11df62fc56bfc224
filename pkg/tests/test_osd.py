import numpy as np
import pytest

from conftest import random_full_rank_generator
from polarosd import channel, gf2, osd
from polarosd.oracle import TinyCode, exhaustive_osd, ml_decode


def micro_context():
    """The worked 2x4 instance: g_tilde=[[1,0,1,1],[0,1,0,1]], s=(1,-2,3,-1).

    Built through build_context from a generator/llr pair chosen so the
    hard decisions are all zero, which makes s equal the permuted y.
    """
    g = gf2.BitMatrix.from_array([[1, 0, 1, 1], [0, 1, 0, 1]])
    llr = np.array([4.0, 3.0, 2.0, 1.0])           # identity permutation
    y = np.array([1.0, -2.0, 3.0, -1.0])
    ctx = osd.build_context(g, llr, y)
    assert ctx.sys.perm.tolist() == [0, 1, 2, 3]
    assert ctx.v_hat.tolist() == [0, 0]
    assert ctx.s.tolist() == [1.0, -2.0, 3.0, -1.0]
    return ctx


def random_instance(rng, k_max=8, n_max=16):
    k = int(rng.integers(2, k_max + 1))
    n = int(rng.integers(k + 1, n_max + 1))
    g = random_full_rank_generator(rng, k, n)
    code = TinyCode(generator=g)
    msg = rng.integers(0, 2, k, dtype=np.uint8)
    x = gf2.encode_row(msg, g)
    ebn0 = rng.uniform(0.0, 4.0)
    sigma2 = 1.0 / (2.0 * (k / n) * 10 ** (ebn0 / 10.0))
    y = channel.bpsk(x) + np.sqrt(sigma2) * rng.standard_normal(n)
    llr = channel.channel_llrs(y, sigma2)
    return g, code, y, llr


def dist2(y, cw):
    d = np.asarray(y) - channel.bpsk(cw)
    return float(d @ d)


class TestBuildContext:
    def test_all_positive_llrs(self, rng):
        g = random_full_rank_generator(rng, 3, 7)
        llr = np.abs(rng.normal(size=7)) + 0.1
        y = rng.normal(size=7)
        ctx = osd.build_context(g, llr, y)
        assert not ctx.v_hat.any()
        assert not ctx.x_bar.any()
        assert np.array_equal(ctx.s, y[ctx.sys.perm])

    def test_worked_2x4_hard_decisions(self):
        g = gf2.BitMatrix.from_array([[1, 0, 1, 0], [0, 1, 1, 1]])
        llr = np.array([-0.1, 0.9, -0.5, 0.3])
        y = llr.copy()
        ctx = osd.build_context(g, llr, y)
        assert ctx.l_perm.tolist() == [0.9, -0.5, 0.3, -0.1]
        assert ctx.v_hat.tolist() == [0, 1]

    def test_reliability_sorted_prefix(self, rng):
        g, code, y, llr = random_instance(rng)
        ctx = osd.build_context(g, llr, y)
        mag = np.abs(ctx.l_perm[: ctx.k])
        assert (np.diff(mag) <= 1e-12).all()
        assert np.allclose(ctx.s, ctx.y_perm * (1 - 2.0 * ctx.x_bar))

    def test_noiseless_base_is_transmitted(self, rng):
        for _ in range(10):
            g, code, y, llr = random_instance(rng)
            msg = rng.integers(0, 2, g.rows, dtype=np.uint8)
            x = gf2.encode_row(msg, g)
            clean = channel.bpsk(x) * 1.0
            ctx = osd.build_context(g, channel.channel_llrs(clean, 1e-6), clean)
            assert np.array_equal(ctx.x_bar, x[ctx.sys.perm])


class TestOrder1:
    def test_micro_scores(self):
        ctx = micro_context()
        scores = osd._order1_scores(ctx)
        assert scores.tolist() == [1.0, -5.0, 7.0]
        cand = osd.reprocess_order1(ctx)
        assert cand.pattern == (1,)
        assert cand.score == 7.0
        assert cand.codeword.tolist() == [0, 1, 0, 1]

    def test_no_flip_wins_without_noise(self, rng):
        g = random_full_rank_generator(rng, 4, 9)
        msg = rng.integers(0, 2, 4, dtype=np.uint8)
        x = gf2.encode_row(msg, g)
        y = channel.bpsk(x)
        ctx = osd.build_context(g, channel.channel_llrs(y, 0.5), y)
        assert osd.reprocess_order1(ctx).pattern == ()

    def test_reference_count_and_agreement(self, rng):
        for _ in range(25):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            cand, additions = osd.reprocess_order1_reference(ctx)
            assert additions == (g.cols - 1) * (g.rows + 1)
            fast = osd.reprocess_order1(ctx)
            assert cand.pattern == fast.pattern
            assert cand.score == pytest.approx(fast.score, abs=1e-9)

    def test_correlation_equals_distance_argmin(self, rng):
        for _ in range(200):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            cand = osd.reprocess_order1(ctx)
            cands = [ctx.x_bar] + [ctx.x_bar ^ row for row in ctx.g_rows]
            dists = [dist2(ctx.y_perm, c) for c in cands]
            assert dist2(ctx.y_perm, cand.codeword) <= min(dists) + 1e-9

    def test_score_is_bpsk_correlation(self, rng):
        g, code, y, llr = random_instance(rng)
        ctx = osd.build_context(g, llr, y)
        cand = osd.reprocess_order1(ctx)
        corr = float(ctx.y_perm @ channel.bpsk(cand.codeword))
        assert cand.score == pytest.approx(corr, abs=1e-9)


class TestOrder2:
    def test_micro_pair_score(self):
        ctx = micro_context()
        pair = osd.reprocess_order2_full(ctx)
        assert pair.pattern == (0, 1)
        assert pair.score == pytest.approx(-3.0)

    def test_matrix_symmetric(self, rng):
        for _ in range(20):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            c = osd._pair_score_matrix(ctx)
            assert np.allclose(c, c.T, atol=1e-9)

    def test_matrix_matches_loop(self, rng):
        for _ in range(30):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            c = osd._pair_score_matrix(ctx)
            gr = ctx.g_rows
            for i in range(ctx.k):
                for j in range(i + 1, ctx.k):
                    loop = float(np.sum(ctx.s * (-1.0) ** (gr[i] ^ gr[j])))
                    assert abs(c[i, j] - loop) < 1e-9

    def test_pair_beats_exhaustive_pairs(self, rng):
        for _ in range(100):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            pair = osd.reprocess_order2_full(ctx)
            best = np.inf
            gr = ctx.g_rows
            for i in range(ctx.k):
                for j in range(i + 1, ctx.k):
                    best = min(best, dist2(ctx.y_perm, ctx.x_bar ^ gr[i] ^ gr[j]))
            assert dist2(ctx.y_perm, pair.codeword) <= best + 1e-9

    def test_k1_rejected(self, rng):
        g = random_full_rank_generator(rng, 1, 4)
        ctx = osd.build_context(g, rng.normal(size=4), rng.normal(size=4))
        with pytest.raises(ValueError):
            osd.reprocess_order2_full(ctx)


class TestPartial:
    def test_enumeration_order_k3(self):
        ii, jj = osd._partial_pairs(3, 2)
        # 1-based pairs (2,3), (1,3)
        assert list(zip(ii.tolist(), jj.tolist())) == [(1, 2), (0, 2)]

    def test_enumeration_exhausts(self):
        ii, jj = osd._partial_pairs(4, 6)
        assert len(ii) == 6
        assert sorted(zip(ii.tolist(), jj.tolist())) == [
            (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    def test_micro_k2_m1(self):
        ctx = micro_context()
        cand = osd.reprocess_order2_partial(ctx, 1)
        assert cand.pattern == (0, 1)
        assert cand.score == pytest.approx(-3.0)

    def test_maximal_m_matches_full_score(self, rng):
        for _ in range(50):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            full = osd.reprocess_order2_full(ctx)
            part = osd.reprocess_order2_partial(ctx, ctx.k * (ctx.k - 1) // 2)
            assert part.score == pytest.approx(full.score, abs=1e-9)

    def test_m_out_of_range(self, rng):
        g, code, y, llr = random_instance(rng)
        ctx = osd.build_context(g, llr, y)
        with pytest.raises(ValueError):
            osd.reprocess_order2_partial(ctx, 0)
        with pytest.raises(ValueError):
            osd.reprocess_order2_partial(ctx, ctx.k * (ctx.k - 1) // 2 + 1)

    def test_partial_subset_of_pairs(self, rng):
        # the best over M pairs can never beat the best over all pairs
        for _ in range(30):
            g, code, y, llr = random_instance(rng)
            ctx = osd.build_context(g, llr, y)
            full = osd.reprocess_order2_full(ctx)
            m = max(1, ctx.k * (ctx.k - 1) // 4)
            part = osd.reprocess_order2_partial(ctx, m)
            assert part.score <= full.score + 1e-9


class TestDecodeOsd:
    def test_order0_noiseless(self, rng):
        for _ in range(10):
            g, code, y, llr = random_instance(rng)
            msg = rng.integers(0, 2, g.rows, dtype=np.uint8)
            x = gf2.encode_row(msg, g)
            clean = channel.bpsk(x)
            out = osd.decode_osd(g, channel.channel_llrs(clean, 0.5), clean, 0)
            assert np.array_equal(out, x)

    def test_output_always_in_rowspace(self, rng):
        for _ in range(50):
            g, code, y, llr = random_instance(rng)
            h = gf2.nullspace(g).to_array()
            for order in (0, 1, 2):
                out = osd.decode_osd(g, llr, y, order)
                assert not ((h @ out.astype(np.int64)) & 1).any()

    def test_distance_monotone_in_order(self, rng):
        for _ in range(60):
            g, code, y, llr = random_instance(rng)
            d = [dist2(y, osd.decode_osd(g, llr, y, q)) for q in (0, 1, 2)]
            assert d[1] <= d[0] + 1e-9
            assert d[2] <= d[1] + 1e-9

    def test_matches_exhaustive_oracle(self, rng):
        for _ in range(150):
            g, code, y, llr = random_instance(rng)
            for q in (1, 2):
                fast = osd.decode_osd(g, llr, y, q)
                ref = exhaustive_osd(y, llr, code, q)
                assert dist2(y, fast) == pytest.approx(dist2(y, ref), abs=1e-9)

    def test_partial_m_plumbing(self, rng):
        g, code, y, llr = random_instance(rng)
        full = osd.decode_osd(g, llr, y, 2)
        part = osd.decode_osd(g, llr, y, 2,
                              partial_m=g.rows * (g.rows - 1) // 2)
        assert dist2(y, full) == pytest.approx(dist2(y, part), abs=1e-9)

    def test_bad_order(self, rng):
        g, code, y, llr = random_instance(rng)
        with pytest.raises(ValueError):
            osd.decode_osd(g, llr, y, 3)

    def test_deterministic(self, rng):
        g, code, y, llr = random_instance(rng)
        a = osd.decode_osd(g, llr, y, 2)
        b = osd.decode_osd(g, llr, y, 2)
        assert np.array_equal(a, b)
