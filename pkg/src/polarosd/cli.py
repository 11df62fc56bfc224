"""Command-line front end: construct codes, run FER sweeps, decode frames."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import crc as crcmod
from . import osd, polar
from .channel import ChannelParams, bpsk, channel_llrs
from .codes import build_code_spec
from .pipeline import (DECODER_KINDS, DecoderConfig, decode_suite,
                       run_cbp_branches, select_cbpl)
from .simharness import SimConfig, emit_csv, run_fer


def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="log2 blocklength")
    p.add_argument("--m", type=int, required=True, help="message length")
    p.add_argument("--crc-poly", default=crcmod.G6_POLY,
                   help="generator polynomial, binary or 0x-hex, highest degree first")
    p.add_argument("--design-ebn0-db", type=float, default=2.5,
                   help="design Eb/N0 for the GA construction")
    p.add_argument("--info-set-file", default=None,
                   help="1-based information-set file overriding the construction")
    p.add_argument("--reliability-file", default=None,
                   help="1-based reliability order file; the top K indices are used")


def _add_decoder_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--decoder", default="cbplosd1",
                   help="comma-separated decoders: " + "|".join(DECODER_KINDS))
    p.add_argument("--list", type=int, default=6, dest="list_size",
                   help="number of layer-permuted BP branches")
    p.add_argument("--alpha", type=float, default=0.5,
                   help="fraction of least-reliable pairs for pcbplosd2")
    p.add_argument("--osd-order", type=int, default=2,
                   help="reprocessing order for plainosd")
    p.add_argument("--i-max", type=int, default=100)
    p.add_argument("--i-thr", type=int, default=50)
    p.add_argument("--kernel", choices=["exact", "minsum"], default="exact")
    p.add_argument("--sat", type=float, default=40.0,
                   help="LLR saturation magnitude")


def _load_info_set(args) -> np.ndarray | None:
    poly = crcmod.parse_poly(args.crc_poly) if isinstance(args.crc_poly, str) \
        else args.crc_poly
    K = args.m + poly.size - 1
    if args.info_set_file:
        return polar.read_info_set(args.info_set_file, args.n).info_set
    if args.reliability_file:
        order = polar.read_reliability_order(args.reliability_file)
        return polar.info_set_from_reliability(order, args.n, K).info_set
    return None


def _decoder_configs(args) -> dict[str, DecoderConfig]:
    cfgs = {}
    for kind in args.decoder.split(","):
        kind = kind.strip()
        cfgs[kind] = DecoderConfig(
            kind=kind, L=args.list_size, alpha=args.alpha, q=args.osd_order,
            i_max=args.i_max, i_thr=args.i_thr, kernel=args.kernel,
            sat=args.sat)
    return cfgs


def _cmd_construct(args) -> int:
    code = build_code_spec(args.n, args.m, args.crc_poly, args.design_ebn0_db,
                           _load_info_set(args))
    if args.out:
        polar.write_info_set(code.polar, args.out)
        print(f"wrote {code.K} indices to {args.out}")
    else:
        for i in code.info_set:
            print(int(i) + 1)
    return 0


def _cmd_simulate(args) -> int:
    cfg = SimConfig(
        n=args.n, m=args.m, decoders=_decoder_configs(args),
        ebn0_db_list=[float(v) for v in args.ebn0_db.split(",")],
        crc_poly=args.crc_poly, design_ebn0_db=args.design_ebn0_db,
        info_set=_load_info_set(args),
        target_frame_errors=args.target_errors if args.target_errors > 0 else None,
        max_frames=args.max_frames,
        seed=args.seed, workers=args.workers, chunk_size=args.chunk_size,
        selfcheck=args.selfcheck)
    points = run_fer(cfg)
    for p in points:
        print(f"{p.decoder:12s} {p.ebn0_db:5.2f} dB  fer={p.fer:.3e} "
              f"({p.frame_errors}/{p.frames})  ci95=[{p.ci95_low:.3e},"
              f"{p.ci95_high:.3e}]  iters={p.mean_iters:.1f}  "
              f"t={p.wallclock:.1f}s")
    if args.out:
        emit_csv(points, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_decode_one(args) -> int:
    code = build_code_spec(args.n, args.m, args.crc_poly, args.design_ebn0_db,
                           _load_info_set(args))
    chan = ChannelParams.from_ebn0(args.ebn0_db, code.rate)
    if args.llr_file:
        llr = np.loadtxt(args.llr_file, dtype=np.float64).reshape(-1)
        # observations consistent with these LLRs: y = sigma^2/2 * llr
        y = 0.5 * chan.sigma2 * llr
    elif args.y_file:
        y = np.loadtxt(args.y_file, dtype=np.float64).reshape(-1)
        llr = channel_llrs(y, chan.sigma2, args.sat)
    else:
        print("decode-one needs --llr-file or --y-file", file=sys.stderr)
        return 2
    if y.size != code.N:
        print(f"expected {code.N} samples, got {y.size}", file=sys.stderr)
        return 2

    cfgs = _decoder_configs(args)
    name, cfg = next(iter(cfgs.items()))
    branches = run_cbp_branches(llr, code, cfg, cfg.branch_count())
    for j, b in enumerate(branches):
        d = float(np.sum((y - bpsk(b.x_hat)) ** 2))
        print(f"branch {j}: converged={b.converged} iters={b.iters_used} "
              f"dist2={d:.4f}")
        ctx = osd.build_context(code.g_aug, b.soft_out, y)
        cand = osd.reprocess_order1(ctx)
        cw = np.empty_like(cand.codeword)
        cw[ctx.sys.perm] = cand.codeword
        print(f"          osd1 pattern={cand.pattern} "
              f"dist2={float(np.sum((y - bpsk(cw)) ** 2)):.4f}")
    if branches:
        sel = select_cbpl(y, branches)
        print(f"cbpl selection: branch={sel.branch} valid={sel.any_converged}")
    outcomes, _ = decode_suite(y, llr, cfgs, code)
    out = outcomes[name]
    bits = "".join(str(int(b)) for b in out.codeword)
    print(f"{name}: dist2={out.dist2:.4f}")
    print(f"codeword: {bits}")
    if args.tx_hex:
        tx = np.array([int(c) for c in bin(int(args.tx_hex, 16))[2:].zfill(code.N)],
                      dtype=np.uint8)
        print("match" if np.array_equal(tx, out.codeword) else "MISMATCH")
    return 0


def _apply_config_file(argv: list[str]) -> list[str]:
    """Prepend key=value pairs from --config as CLI flags (CLI wins)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    injected = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            flag = "--" + key.strip().replace("_", "-")
            value = value.strip()
            if value.lower() in ("true", "false"):
                if value.lower() == "true":
                    injected.append(flag)
            else:
                injected.extend([flag, value])
    return rest[:1] + injected + rest[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(
        prog="polarosd",
        description="CRC-augmented polar codes with BP-list and OSD decoding")
    sub = parser.add_subparsers(dest="command", required=True)

    p_con = sub.add_parser("construct", help="emit the information set")
    _add_code_args(p_con)
    p_con.add_argument("--out", default=None)
    p_con.set_defaults(func=_cmd_construct)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo FER sweep")
    _add_code_args(p_sim)
    _add_decoder_args(p_sim)
    p_sim.add_argument("--ebn0-db", required=True,
                       help="comma-separated Eb/N0 points in dB")
    p_sim.add_argument("--seed", type=int, default=1)
    p_sim.add_argument("--max-frames", type=int, default=1_000_000)
    p_sim.add_argument("--target-errors", type=int, default=100)
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--chunk-size", type=int, default=100)
    p_sim.add_argument("--selfcheck", action="store_true",
                       help="assert validity invariants on every frame")
    p_sim.add_argument("--out", default=None, help="CSV output path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_one = sub.add_parser("decode-one", help="decode a single frame")
    _add_code_args(p_one)
    _add_decoder_args(p_one)
    p_one.add_argument("--ebn0-db", type=float, required=True)
    p_one.add_argument("--llr-file", default=None,
                       help="channel LLRs, one float per line")
    p_one.add_argument("--y-file", default=None,
                       help="raw channel observations, one float per line")
    p_one.add_argument("--tx-hex", default=None,
                       help="transmitted codeword as hex, for error checking")
    p_one.set_defaults(func=_cmd_decode_one)

    args = parser.parse_args(_apply_config_file(argv))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
