"""Command-line front end.

Subcommands build angle profiles, emit distance-versus-gamma curves, and run
the Monte Carlo experiments.  Every output file gets a sibling
<file>.manifest.json recording the command, parameters, seed, tool version
and timestamps; re-running with the manifest's parameters reproduces the
output byte for byte regardless of --workers.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 unsupported
combination.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .baselines import build_x_lookup, lattice_precoder
from .errors import (
    DegenerateChannelError,
    LatticeDataError,
    NumericalError,
    UnsupportedCombinationError,
    UnsupportedModulationError,
)
from .optimizer import SearchGrid, build_profile, save_profile
from .simulator import SimConfig, run_nosearch, run_wep, run_zeta_stats

USAGE_ERROR = 2
NUMERICAL_ERROR = 3
UNSUPPORTED = 4

_ORDERS = (4, 16, 64, 256, 1024)


def _parse_snr_grid(text: str) -> tuple[float, ...]:
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("SNR grid must be start:step:stop") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("SNR grid must be increasing")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + k * step for k in range(count))


def _write_manifest(out_path: str, command: str, params: dict, seed,
                    started: str) -> None:
    doc = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [out_path],
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _cmd_profile(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    profile = build_profile(args.order, SearchGrid(args.step))
    save_profile(profile, args.out)
    print(f"{args.order}-QAM profile: {len(profile.segments)} segments")
    print(f"{'range':>22}  {'theta':>8}  {'tan(g)tan(psi)':>14}  pairs")
    for seg in profile.segments:
        pairs = ", ".join(str(p) for p in seg.pairs)
        print(f"[{seg.gamma_lo:8.4f}, {seg.gamma_hi:8.4f}]  {seg.theta_star:8.4f}  "
              f"{math.sqrt(seg.weight):14.4f}  {pairs}")
    _write_manifest(args.out, "profile",
                    {"order": args.order, "step": args.step, "out": args.out},
                    None, started)
    return 0


def _cmd_delta_curve(args) -> int:
    from .system import pair_delta_curve

    started = datetime.now(timezone.utc).isoformat()
    gammas = np.arange(1, args.points + 1) * (math.pi / 4.0) / args.points
    profile = build_profile(args.order) if args.precoder == "proposed" else None
    x_lookup = build_x_lookup(args.order) if args.precoder == "x" and args.order > 4 else None
    rotation = lattice_precoder(2) if args.precoder == "lattice" else None
    deltas = pair_delta_curve(args.order, args.precoder, gammas, profile=profile,
                              x_lookup=x_lookup, rotation=rotation)
    if args.scale4:
        deltas = 4.0 * deltas
    _write_csv(args.out, ["gamma", "delta"],
               [[float(g), float(d)] for g, d in zip(gammas, deltas)])
    _write_manifest(args.out, "delta-curve",
                    {"order": args.order, "precoder": args.precoder,
                     "points": args.points, "scale4": args.scale4, "out": args.out},
                    None, started)
    return 0


def _cmd_wep(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    cfg = SimConfig(n_t=args.nt, n_r=args.nr, order=args.order, kind=args.precoder,
                    snr_grid_db=_parse_snr_grid(args.snr_db),
                    trials_per_point=args.trials, seed=args.seed,
                    worker_hint=args.workers)
    points = run_wep(cfg)
    _write_csv(args.out, ["snr_db", "trials", "word_errors", "wep", "ci_halfwidth"],
               [[p.snr_db, p.trials, p.word_errors, p.wep, p.ci_halfwidth] for p in points])
    _write_manifest(args.out, "wep",
                    {"nt": args.nt, "nr": args.nr, "order": args.order,
                     "precoder": args.precoder, "snr_db": args.snr_db,
                     "trials": args.trials, "seed": args.seed, "out": args.out},
                    args.seed, started)
    return 0


def _cmd_zeta(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    zeta_min, p_zeta = run_zeta_stats(args.nt, args.nt, args.order, args.trials, args.seed)
    _write_csv(args.out, ["zeta_min", "p_zeta", "trials"],
               [[float(zeta_min), float(p_zeta), args.trials]])
    print(f"zeta_min={zeta_min:.6g}  P(zeta<1)={p_zeta:.6g}  ({args.trials} trials)")
    _write_manifest(args.out, "zeta",
                    {"nt": args.nt, "order": args.order, "trials": args.trials,
                     "seed": args.seed, "out": args.out},
                    args.seed, started)
    return 0


def _cmd_nosearch(args) -> int:
    started = datetime.now(timezone.utc).isoformat()
    probs = run_nosearch(args.nt, args.nt, args.order, args.trials, args.seed)
    _write_csv(args.out, ["pair_index", "probability", "trials"],
               [[idx, float(p), args.trials] for idx, p in probs])
    for idx, p in probs:
        print(f"pair {idx}: P(no search) = {p:.6g}")
    _write_manifest(args.out, "nosearch",
                    {"nt": args.nt, "order": args.order, "trials": args.trials,
                     "seed": args.seed, "out": args.out},
                    args.seed, started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-precode",
        description="SVD-based MIMO precoding experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="build and save an angle profile")
    p.add_argument("--order", type=int, choices=_ORDERS, required=True)
    p.add_argument("--step", type=float, default=0.001)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("delta-curve", help="worst-case distance versus gamma")
    p.add_argument("--order", type=int, choices=_ORDERS, required=True)
    p.add_argument("--precoder", choices=("proposed", "edmin", "x", "y", "lattice"),
                   required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--scale4", action="store_true",
                   help="report full-difference distances (4x)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_delta_curve)

    p = sub.add_parser("wep", help="word error probability versus SNR")
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--nr", type=int, required=True)
    p.add_argument("--order", type=int, choices=_ORDERS, required=True)
    p.add_argument("--precoder", choices=("proposed", "edmin", "x", "y", "lattice"),
                   required=True)
    p.add_argument("--snr-db", required=True, help="grid as start:step:stop (dB)")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1,
                   help="parallelism hint; never changes results")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_wep)

    p = sub.add_parser("zeta", help="equalization-ratio statistics")
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--order", type=int, choices=_ORDERS, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_zeta)

    p = sub.add_parser("nosearch", help="probability that decoding is search-free")
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--order", type=int, choices=_ORDERS, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_nosearch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UnsupportedCombinationError, UnsupportedModulationError, LatticeDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return UNSUPPORTED
    except (NumericalError, DegenerateChannelError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
