"""Command-line interface.

Exit codes: 0 on success (for ``register``, a valid pose), 2 when the
pipeline ran but produced no trustworthy result, 1 on I/O or usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchConfig, run_benchmark, timing_table, write_outputs
from .errors import CloudFormatError, RegistrationError
from .features import extract
from .io import read_cloud
from .params import Params
from .pipeline import register
from .preprocess import voxel_downsample

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="voxreg", description="Global point cloud registration")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    reg = sub.add_parser("register", help="estimate the pose aligning source onto target")
    reg.add_argument("--source", required=True, help="source cloud (.xyz or .ply)")
    reg.add_argument("--target", required=True, help="target cloud (.xyz or .ply)")
    reg.add_argument("--voxel", type=float, required=True, help="voxel size in meters")
    reg.add_argument("--suppress-ground", action="store_true",
                     help="remove a dominant near-horizontal plane before matching")
    reg.add_argument("--beta-mult", type=float, default=1.5,
                     help="noise bound as a multiple of the voxel size")
    reg.add_argument("--ntau", type=int, default=3000,
                     help="cap on correspondences entering the pruning stage")
    reg.add_argument("--tau-valid", type=int, default=5,
                     help="minimum final inlier count for a valid result")
    reg.add_argument("--json", dest="json_out", default=None,
                     help="write the full result as JSON to this path")

    ext = sub.add_parser("extract", help="dump descriptors for one cloud")
    ext.add_argument("--input", required=True, help="cloud file (.xyz or .ply)")
    ext.add_argument("--voxel", type=float, required=True, help="voxel size in meters")
    ext.add_argument("--out", default=None, help="output path (default: stdout)")

    ben = sub.add_parser("bench", help="run the synthetic scene benchmark")
    ben.add_argument("--out", required=True, help="output directory for report artifacts")
    ben.add_argument("--scenes", type=int, default=50)
    ben.add_argument("--points", type=int, default=4000)
    ben.add_argument("--voxel", type=float, default=0.2)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--workers", type=int, default=1)
    return parser


def _cmd_register(args) -> int:
    src = read_cloud(args.source)
    tgt = read_cloud(args.target)
    params = Params(
        v=args.voxel,
        beta=args.beta_mult * args.voxel,
        n_tau=args.ntau,
        tau_valid=args.tau_valid,
        suppress_dominant_plane=args.suppress_ground,
    )
    result = register(src, tgt, params)

    for row in result.pose.matrix():
        print(" ".join(f"{x: .9g}" for x in row))
    print(f"inliers: {result.num_inliers}")
    print(f"valid: {result.valid}")
    if result.failure_reason:
        print(f"reason: {result.failure_reason}")
    for record in result.stage_trace:
        print(f"  {record.stage:<20} count={record.count:<7} {record.ms:9.2f} ms")

    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(result.report_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if result.valid else EXIT_INVALID


def _cmd_extract(args) -> int:
    cloud = read_cloud(args.input)
    params = Params(v=args.voxel)
    down = voxel_downsample(cloud, params.v)
    if len(down) == 0:
        raise RegistrationError("no reliable points: cloud is empty")
    text = extract(down, params).dump_text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = BenchConfig(
        n_scenes=args.scenes,
        n_points=args.points,
        voxel=args.voxel,
        base_seed=args.seed,
    )
    report, timings = run_benchmark(config, workers=args.workers)
    write_outputs(report, timings, args.out)
    summary = report["summary"]
    print(f"scenes:       {summary['n_scenes']}")
    print(f"successes:    {summary['n_success']}")
    print(f"success rate: {summary['success_rate']:.1%}")
    if summary["mean_rte_m_success"] is not None:
        print(f"mean RTE (successes): {summary['mean_rte_m_success']:.4f} m")
        print(f"mean RRE (successes): {summary['mean_rre_deg_success']:.4f} deg")
    print()
    print(timing_table(timings), end="")
    print(f"artifacts written to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "register":
            return _cmd_register(args)
        if args.command == "extract":
            return _cmd_extract(args)
        return _cmd_bench(args)
    except (OSError, CloudFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegistrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
