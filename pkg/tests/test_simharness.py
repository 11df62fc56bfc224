import numpy as np
import pytest

from polarosd import simharness
from polarosd.pipeline import DecoderConfig
from polarosd.simharness import SimConfig, emit_csv, run_fer, wilson_interval


def small_config(**kw):
    base = dict(
        n=5, m=10,
        decoders={"cbp": DecoderConfig(kind="cbp", i_max=30, i_thr=15),
                  "cbplosd1": DecoderConfig(kind="cbplosd1", i_max=30, i_thr=15)},
        ebn0_db_list=[2.0],
        target_frame_errors=None,
        max_frames=200,
        seed=11,
        chunk_size=50,
    )
    base.update(kw)
    return SimConfig(**base)


class TestWilson:
    def test_zero_errors(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < hi < 0.05

    def test_contains_point_estimate(self):
        lo, hi = wilson_interval(30, 200)
        assert lo < 0.15 < hi
        assert 0.0 <= lo <= hi <= 1.0

    def test_empty(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)


class TestRunFer:
    def test_noiseless_override_zero_fer(self):
        cfg = small_config(ebn0_db_list=[40.0], max_frames=120)
        points = run_fer(cfg)
        assert all(p.frame_errors == 0 for p in points)
        assert all(p.fer == 0.0 for p in points)
        assert all(p.frames == 120 for p in points)

    def test_point_fields(self):
        cfg = small_config()
        points = run_fer(cfg)
        assert len(points) == 2
        for p in points:
            assert p.frames == 200
            assert p.fer == p.frame_errors / p.frames
            assert 0.0 <= p.ci95_low <= p.fer <= p.ci95_high <= 1.0
            assert p.seed == 11
            assert p.wallclock > 0
        by_name = {p.decoder: p for p in points}
        assert by_name["cbp"].mean_iters > 1.0
        # paired run: list decoding cannot do worse than these frames allow
        assert by_name["cbplosd1"].frame_errors <= by_name["cbp"].frame_errors

    def test_early_stop_at_target(self):
        cfg = small_config(ebn0_db_list=[0.0], target_frame_errors=20,
                           max_frames=5000, chunk_size=25)
        points = run_fer(cfg)
        assert all(p.frame_errors >= 20 for p in points)
        assert all(p.frames < 5000 for p in points)
        assert all(p.frames % 25 == 0 for p in points)

    def test_determinism_across_worker_counts(self):
        a = run_fer(small_config(workers=1))
        b = run_fer(small_config(workers=3))
        for pa, pb in zip(a, b):
            assert (pa.decoder, pa.frames, pa.frame_errors) == \
                   (pb.decoder, pb.frames, pb.frame_errors)
            assert pa.mean_iters == pb.mean_iters

    def test_collect_errors(self):
        cfg = small_config(collect_errors=True, max_frames=100)
        points = run_fer(cfg)
        for p in points:
            assert p.errors is not None and p.errors.size == 100
            assert int(p.errors.sum()) == p.frame_errors

    def test_selfcheck_clean_run(self):
        cfg = small_config(
            decoders={"cbp": DecoderConfig(kind="cbp", i_max=30, i_thr=15),
                      "cbplosd1": DecoderConfig(kind="cbplosd1", i_max=30, i_thr=15),
                      "cbplosd2": DecoderConfig(kind="cbplosd2", i_max=30, i_thr=15),
                      "pcbplosd2": DecoderConfig(kind="pcbplosd2", alpha=0.5,
                                                 i_max=30, i_thr=15)},
            ebn0_db_list=[1.0], max_frames=150, selfcheck=True)
        points = run_fer(cfg)  # raises on violation
        assert points

    def test_strict_accounting_not_lower(self):
        decoders = {"cbpl": DecoderConfig(kind="cbpl", i_max=30, i_thr=15),
                    "cbpl_strict": DecoderConfig(kind="cbpl_strict",
                                                 i_max=30, i_thr=15)}
        cfg = small_config(decoders=decoders, ebn0_db_list=[1.0], max_frames=200)
        by_name = {p.decoder: p for p in run_fer(cfg)}
        assert by_name["cbpl_strict"].frame_errors >= by_name["cbpl"].frame_errors

    def test_validation(self):
        with pytest.raises(ValueError):
            small_config(max_frames=0)
        with pytest.raises(ValueError):
            small_config(decoders={})


class TestCsv:
    def test_header_only(self, tmp_path):
        path = tmp_path / "out.csv"
        emit_csv([], path)
        assert path.read_text() == simharness.CSV_HEADER + "\n"

    def test_roundtrip(self, tmp_path):
        cfg = small_config(max_frames=60)
        points = run_fer(cfg)
        path = tmp_path / "out.csv"
        emit_csv(points, path)
        lines = path.read_text().splitlines()
        assert lines[0] == simharness.CSV_HEADER
        assert len(lines) == 1 + len(points)
        first = lines[1].split(",")
        assert first[0] == "cbp"
        assert float(first[1]) == 2.0
        assert int(first[2]) == 60
        assert float(first[4]) == points[0].fer
        # every numeric field is a bare decimal (round-trippable)
        for row in lines[1:]:
            cells = row.split(",")
            assert len(cells) == 9
            for cell in cells[1:8]:
                assert float(cell) >= 0.0
                assert "(" not in cell
        assert float(first[5]) == points[0].ci95_low
        assert float(first[6]) == points[0].ci95_high

    def test_paired_run_row_count(self, tmp_path):
        cfg = small_config(ebn0_db_list=[1.0, 2.0], max_frames=50)
        points = run_fer(cfg)
        assert len(points) == 4  # 2 decoders x 2 SNRs
        path = tmp_path / "out.csv"
        emit_csv(points, path)
        assert len(path.read_text().splitlines()) == 5
