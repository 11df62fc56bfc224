"""Monte-Carlo FER estimation with deterministic per-frame sub-seeding.

Each frame f draws its message and unit noise from an independent stream
keyed by (seed, f), so results are bit-identical for any worker count and
any SNR points share common randomness.  Paired runs evaluate all
configured decoders on the same frames through the shared-computation
suite.  Stopping happens at chunk boundaries once every decoder has hit
the target error count (or at max_frames), which keeps the stop decision
independent of scheduling.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass, field

import numpy as np

from . import crc as crcmod
from .channel import ChannelParams, bpsk, channel_llrs
from .codes import CodeSpec, build_code_spec, encode_frame
from .crc import crc_check
from .pipeline import DecoderConfig, decode_suite
from .polar import polar_transform

_OSD_KINDS = ("cbposd1", "cbplosd1", "cbplosd2", "pcbplosd2", "plainosd")


@dataclass
class SimConfig:
    """One simulation campaign: a code, SNR points, and decoder set."""

    n: int
    m: int
    decoders: dict[str, DecoderConfig]
    ebn0_db_list: list[float]
    crc_poly: str = crcmod.G6_POLY
    design_ebn0_db: float = 2.5
    info_set: np.ndarray | None = None
    target_frame_errors: int | None = 100
    max_frames: int = 1_000_000
    seed: int = 1
    workers: int = 1
    chunk_size: int = 100
    selfcheck: bool = False
    collect_errors: bool = False

    def __post_init__(self):
        if not self.decoders:
            raise ValueError("at least one decoder is required")
        if self.max_frames < 1:
            raise ValueError("max_frames must be at least 1")
        if self.target_frame_errors is not None and self.target_frame_errors < 1:
            raise ValueError("target_frame_errors must be at least 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class FerPoint:
    """One decoder at one SNR point."""

    decoder: str
    ebn0_db: float
    frames: int
    frame_errors: int
    fer: float
    ci95_low: float
    ci95_high: float
    mean_iters: float
    seed: int
    wallclock: float = 0.0
    errors: np.ndarray | None = field(default=None, repr=False)


def wilson_interval(errors: int, frames: int, z: float = 1.959963984540054
                    ) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if frames == 0:
        return 0.0, 1.0
    p = errors / frames
    z2 = z * z
    denom = 1.0 + z2 / frames
    center = (p + z2 / (2 * frames)) / denom
    half = z * math.sqrt(p * (1 - p) / frames + z2 / (4 * frames * frames)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# Worker-side state (built once per process by the pool initializer).
_WORKER_STATE = None


def _build_state(payload: dict) -> dict:
    code = build_code_spec(payload["n"], payload["m"], payload["crc_poly"],
                           payload["design_ebn0_db"], payload["info_set"])
    if payload["selfcheck"]:
        code.h_aug()
    return {
        "code": code,
        "decoders": payload["decoders"],
        "seed": payload["seed"],
        "selfcheck": payload["selfcheck"],
    }


def _init_worker(payload: dict) -> None:
    global _WORKER_STATE
    _WORKER_STATE = _build_state(payload)


def _selfcheck_frame(frame: int, y: np.ndarray, code: CodeSpec, cfgs,
                     outcomes, branches, violations: list) -> None:
    for name, cfg in cfgs.items():
        if cfg.kind in _OSD_KINDS and not code.is_codeword(outcomes[name].codeword):
            violations.append(f"frame {frame}: {name} output fails syndrome check")
    for j, b in enumerate(branches):
        if not b.converged:
            continue
        if not np.array_equal(polar_transform(b.u_hat), b.x_hat):
            violations.append(f"frame {frame}: branch {j} converged but re-encode differs")
        if not crc_check(b.u_hat[code.info_set], code.crc):
            violations.append(f"frame {frame}: branch {j} converged but CRC fails")
    tol = 1e-9
    for name, cfg in cfgs.items():
        if cfg.kind not in ("cbposd1", "cbplosd1") or not branches:
            continue
        conv = [float(np.sum((y - bpsk(b.x_hat)) ** 2))
                for b in branches[: cfg.branch_count()] if b.converged]
        if conv and outcomes[name].dist2 > min(conv) + tol:
            violations.append(f"frame {frame}: {name} beaten by a converged branch")
    # selected distance must not improve as the pair search shrinks:
    # full order-2, then partial by decreasing alpha, then order-1
    chain = ([n for n, c in cfgs.items() if c.kind == "cbplosd2"]
             + sorted((n for n, c in cfgs.items() if c.kind == "pcbplosd2"),
                      key=lambda n: -cfgs[n].alpha)
             + [n for n, c in cfgs.items() if c.kind == "cbplosd1"])
    dists = [outcomes[n].dist2 for n in chain]
    if any(a > b + tol for a, b in zip(dists, dists[1:])):
        violations.append(f"frame {frame}: distance ordering violated across orders")


def _decode_chunk(state: dict, sigma2: float, lo: int, hi: int) -> dict:
    code: CodeSpec = state["code"]
    cfgs: dict[str, DecoderConfig] = state["decoders"]
    seed = state["seed"]
    sat = next(iter(cfgs.values())).sat
    names = list(cfgs)
    nf = hi - lo
    errors = {name: np.zeros(nf, dtype=bool) for name in names}
    iters = dict.fromkeys(names, 0)
    violations: list[str] = []
    scale = float(np.sqrt(sigma2))
    for t in range(nf):
        frame = lo + t
        rng = np.random.default_rng([seed, frame])
        msg = rng.integers(0, 2, size=code.m, dtype=np.uint8)
        z = rng.standard_normal(code.N)
        _, x = encode_frame(msg, code)
        y = bpsk(x) + scale * z
        llr = channel_llrs(y, sigma2, sat)
        outcomes, branches = decode_suite(y, llr, cfgs, code)
        for name in names:
            out = outcomes[name]
            err = not np.array_equal(out.codeword, x)
            if cfgs[name].kind == "cbpl_strict" and not out.converged_any:
                err = True
            errors[name][t] = err
            iters[name] += out.iters_total
        if state["selfcheck"]:
            _selfcheck_frame(frame, y, code, cfgs, outcomes, branches, violations)
    return {"lo": lo, "hi": hi, "errors": errors, "iters": iters,
            "violations": violations}


def _pool_chunk(args) -> dict:
    sigma2, lo, hi = args
    return _decode_chunk(_WORKER_STATE, sigma2, lo, hi)


def run_fer(cfg: SimConfig) -> list[FerPoint]:
    """Simulate every decoder at every SNR point.

    Frame errors are codeword-level: a frame counts as an error iff the
    decoded codeword differs from the transmitted one (for cbpl_strict,
    also when no branch converged).  Raises RuntimeError on selfcheck
    violations.
    """
    if cfg.info_set is None:
        probe = build_code_spec(cfg.n, cfg.m, cfg.crc_poly, cfg.design_ebn0_db)
        info_set = probe.info_set
    else:
        info_set = np.asarray(cfg.info_set, dtype=np.int64)
    payload = {
        "n": cfg.n, "m": cfg.m, "crc_poly": cfg.crc_poly,
        "design_ebn0_db": cfg.design_ebn0_db, "info_set": info_set,
        "decoders": cfg.decoders, "seed": cfg.seed, "selfcheck": cfg.selfcheck,
    }
    rate = cfg.m / (1 << cfg.n)
    points: list[FerPoint] = []
    for ebn0 in cfg.ebn0_db_list:
        chan = ChannelParams.from_ebn0(ebn0, rate)
        t0 = time.perf_counter()
        merged = _run_point(cfg, payload, chan.sigma2)
        elapsed = time.perf_counter() - t0
        frames = merged["frames"]
        for name in cfg.decoders:
            errs = merged["errors"][name]
            n_err = int(errs.sum())
            lo95, hi95 = wilson_interval(n_err, frames)
            nb = cfg.decoders[name].branch_count()
            mean_iters = (merged["iters"][name] / (frames * nb)) if nb else 0.0
            points.append(FerPoint(
                decoder=name, ebn0_db=ebn0, frames=frames, frame_errors=n_err,
                fer=n_err / frames, ci95_low=lo95, ci95_high=hi95,
                mean_iters=mean_iters, seed=cfg.seed, wallclock=elapsed,
                errors=errs if cfg.collect_errors else None))
    return points


def _run_point(cfg: SimConfig, payload: dict, sigma2: float) -> dict:
    chunks = []
    lo = 0
    while lo < cfg.max_frames:
        hi = min(lo + cfg.chunk_size, cfg.max_frames)
        chunks.append((sigma2, lo, hi))
        lo = hi

    names = list(cfg.decoders)
    err_parts = {name: [] for name in names}
    counts = dict.fromkeys(names, 0)
    iters = dict.fromkeys(names, 0)
    violations: list[str] = []
    frames = 0

    def consume(result) -> bool:
        nonlocal frames
        frames = result["hi"]
        for name in names:
            err_parts[name].append(result["errors"][name])
            counts[name] += int(result["errors"][name].sum())
            iters[name] += result["iters"][name]
        violations.extend(result["violations"])
        if cfg.target_frame_errors is None:
            return False
        return all(c >= cfg.target_frame_errors for c in counts.values())

    if cfg.workers <= 1:
        state = _build_state(payload)
        for chunk in chunks:
            if consume(_decode_chunk(state, *chunk)):
                break
    else:
        with multiprocessing.Pool(cfg.workers, initializer=_init_worker,
                                  initargs=(payload,)) as pool:
            for result in pool.imap(_pool_chunk, chunks):
                if consume(result):
                    break

    if violations:
        preview = "; ".join(violations[:5])
        raise RuntimeError(f"{len(violations)} selfcheck violations: {preview}")
    return {
        "frames": frames,
        "errors": {name: np.concatenate(err_parts[name]) for name in names},
        "iters": iters,
    }


CSV_HEADER = "decoder,ebn0_db,frames,frame_errors,fer,ci95_low,ci95_high,mean_iters,seed"


def emit_csv(points: list[FerPoint], path) -> None:
    """Write one row per decoder/SNR point with round-trippable decimals."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for p in points:
            fh.write(f"{p.decoder},{p.ebn0_db!r},{p.frames},{p.frame_errors},"
                     f"{p.fer!r},{p.ci95_low!r},{p.ci95_high!r},"
                     f"{p.mean_iters!r},{p.seed}\n")
