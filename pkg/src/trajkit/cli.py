"""Batch CLI over the library: inspect files, sample, match, run the server.

Every flag can also come from an OV_-prefixed environment variable
(OV_TAU_D for --tau-d and so on); explicit flags win. Exit codes are a
stable contract: 0 success, 2 parse failure, 3 invalid parameters,
4 environment problems.
"""

from __future__ import annotations

import argparse
import errno
import json
import os
import socket
import sys
from pathlib import Path
from typing import Optional, Sequence

from trajkit import wire
from trajkit.matching import MatchParams, find_correspondences
from trajkit.model import EmptyTrajectory, MissingGps, MissingHeading, Trajectory, planar_distance
from trajkit.parsers import ParseError, ParserDescriptor, load_trajectory
from trajkit.sampling import SamplingParams, sample
from trajkit.server import DEFAULT_PORT, create_app

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PARAMS = 3
EXIT_ENVIRONMENT = 4

FORMAT_CHOICES = ("auto", "kitti", "csv-ins", "nvm", "bdd-json", "delimited")


def _env(name: str, cast, fallback):
    raw = os.environ.get(f"OV_{name}")
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except (TypeError, ValueError):
        return fallback


def _fail(code: int, message: str) -> int:
    print(f"trajkit: {message}", file=sys.stderr)
    return code


def _load(path: str, format_flag: str, column_map_file: Optional[str]) -> Trajectory:
    descriptor = None
    if column_map_file:
        data = json.loads(Path(column_map_file).read_text())
        if "formatId" not in data:
            data["formatId"] = "delimited-generic"
        descriptor = ParserDescriptor.from_dict(data)
    format_id = "delimited-generic" if format_flag == "delimited" else format_flag
    return load_trajectory(
        path, format_id, descriptor=descriptor, traj_id=Path(path).as_posix()
    )


def cmd_info(args) -> int:
    try:
        trajectory = _load(args.path, args.format, args.column_map)
    except ParseError as error:
        return _fail(EXIT_PARSE, str(error))
    poses = trajectory.poses
    path_length = sum(planar_distance(a, b) for a, b in zip(poses, poses[1:]))
    lo = [min(p.position[k] for p in poses) for k in range(3)]
    hi = [max(p.position[k] for p in poses) for k in range(3)]
    duration = poses[-1].timestamp - poses[0].timestamp
    print(f"id:          {trajectory.id}")
    print(f"format:      {trajectory.source_format}")
    print(f"poses:       {len(poses)}")
    print(f"duration:    {duration:.3f} s")
    print(f"path length: {path_length:.3f} m")
    print(f"bounding box: x [{lo[0]:.2f}, {hi[0]:.2f}]  y [{lo[1]:.2f}, {hi[1]:.2f}]  z [{lo[2]:.2f}, {hi[2]:.2f}]")
    print(f"images:      {len(trajectory.image_manifest)}")
    summary = {
        "id": trajectory.id,
        "format": trajectory.source_format,
        "poseCount": len(poses),
        "duration": duration,
        "pathLength": path_length,
        "boundingBox": {"min": lo, "max": hi},
        "imageCount": len(trajectory.image_manifest),
    }
    print(wire.canonical_dumps(summary))
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        params = SamplingParams(mode=args.mode, tau_d=args.tau_d, tau_theta=args.tau_theta)
    except ValueError as error:
        return _fail(EXIT_PARAMS, str(error))
    try:
        trajectory = _load(args.path, args.format, args.column_map)
        result = sample(trajectory.poses, params)
    except (ParseError, MissingHeading, EmptyTrajectory) as error:
        return _fail(EXIT_PARSE, str(error))
    body = wire.canonical_bytes(wire.sample_export(trajectory.id, trajectory, result))
    if args.out:
        Path(args.out).write_bytes(body)
        print(
            f"selected {len(result.selected_indices)} of {result.total_candidates} poses -> {args.out}",
            file=sys.stderr,
        )
    else:
        sys.stdout.buffer.write(body + b"\n")
        print(
            f"selected {len(result.selected_indices)} of {result.total_candidates} poses",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_match(args) -> int:
    try:
        params = MatchParams(
            alpha=args.alpha,
            beta=args.beta,
            tau_beta_theta=args.tau_beta_theta,
            tau_beta_d=args.tau_beta_d,
            tau_loss=args.tau_loss,
            max_distance=args.max_distance,
        )
    except ValueError as error:
        return _fail(EXIT_PARAMS, str(error))
    try:
        query = _load(args.query, args.format, args.column_map)
        candidate = _load(args.candidate, args.format, args.column_map)
        pairs = find_correspondences(query, candidate, params)
    except (ParseError, MissingGps, MissingHeading, EmptyTrajectory) as error:
        return _fail(EXIT_PARSE, str(error))
    body = wire.canonical_bytes(wire.match_export(query.id, candidate.id, params, pairs))
    if args.out:
        Path(args.out).write_bytes(body)
        print(f"matched {len(pairs)} pose pairs -> {args.out}", file=sys.stderr)
    else:
        sys.stdout.buffer.write(body + b"\n")
        print(f"matched {len(pairs)} pose pairs", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    root = Path(args.root)
    if not root.is_dir():
        return _fail(EXIT_ENVIRONMENT, f"dataset root {root} is not a directory")
    try:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((args.host, args.port))
        sock.listen(128)
    except OSError as error:
        if error.errno == errno.EADDRINUSE:
            return _fail(EXIT_ENVIRONMENT, f"port {args.port} is already in use")
        return _fail(EXIT_ENVIRONMENT, str(error))
    static_dir = args.static_dir if args.static_dir and Path(args.static_dir).is_dir() else None
    app = create_app(root=root, settings_dir=args.settings_dir, static_dir=static_dir)
    print(f"serving {root} on http://{args.host}:{args.port}", file=sys.stderr)
    config = uvicorn.Config(app, host=args.host, port=args.port, log_level="warning")
    server = uvicorn.Server(config)
    try:
        # uvicorn drains in-flight requests, then re-raises the interrupt
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajkit", description="Trajectory curation for driving datasets."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input_flags(p):
        p.add_argument(
            "--format",
            choices=FORMAT_CHOICES,
            default=_env("FORMAT", str, "auto"),
            help="input format (default: auto-detect by extension and header)",
        )
        p.add_argument(
            "--column-map",
            default=_env("COLUMN_MAP", str, None),
            help="JSON parser-descriptor file for delimited inputs",
        )

    p_info = sub.add_parser("info", help="print a summary of a trajectory file")
    p_info.add_argument("path")
    add_input_flags(p_info)
    p_info.set_defaults(func=cmd_info)

    p_sample = sub.add_parser("sample", help="subsample a trajectory, export JSON")
    p_sample.add_argument("path")
    p_sample.add_argument(
        "--mode", choices=("uniform", "adaptive"), default=_env("MODE", str, "uniform")
    )
    p_sample.add_argument("--tau-d", type=float, default=_env("TAU_D", float, 12.0),
                          help="distance threshold in meters (default 12)")
    p_sample.add_argument("--tau-theta", type=float, default=_env("TAU_THETA", float, 15.0),
                          help="angle threshold in degrees (default 15)")
    p_sample.add_argument("--out", default=_env("OUT", str, None))
    add_input_flags(p_sample)
    p_sample.set_defaults(func=cmd_sample)

    p_match = sub.add_parser("match", help="find pose correspondences, export JSON")
    p_match.add_argument("query")
    p_match.add_argument("candidate")
    p_match.add_argument("--alpha", type=float, default=_env("ALPHA", float, 1.0))
    p_match.add_argument("--beta", type=float, default=_env("BETA", float, 1.0))
    p_match.add_argument("--tau-beta-theta", type=float,
                         default=_env("TAU_BETA_THETA", float, 15.0))
    p_match.add_argument("--tau-beta-d", type=float, default=_env("TAU_BETA_D", float, 12.0))
    p_match.add_argument("--tau-loss", type=float, default=_env("TAU_LOSS", float, 30.0))
    p_match.add_argument("--max-distance", type=float,
                         default=_env("MAX_DISTANCE", float, 30.0))
    p_match.add_argument("--out", default=_env("OUT", str, None))
    add_input_flags(p_match)
    p_match.set_defaults(func=cmd_match)

    p_serve = sub.add_parser("serve", help="serve datasets and the viewer over HTTP")
    p_serve.add_argument("--root", default=_env("ROOT", str, "."))
    p_serve.add_argument("--host", default=_env("HOST", str, "127.0.0.1"))
    p_serve.add_argument("--port", type=int, default=_env("PORT", int, DEFAULT_PORT))
    p_serve.add_argument("--settings-dir", default=_env("SETTINGS_DIR", str, None))
    p_serve.add_argument("--static-dir", default=_env("STATIC_DIR", str, None))
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve" and args.settings_dir is None:
        args.settings_dir = str(Path(args.root) / ".trajkit-settings")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
