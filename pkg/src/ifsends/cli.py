"""Command-line front end.

Exit codes: 0 success, 1 error (or, for ``verify``, a failed check),
2 analysis finished with anomalies, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .attractor import DEFAULT_CLOUD_CAP, render_raster, sample_cloud, to_pgm
from .dsl import DslError, IfsDocument, parse
from .ends import build_link_graph, link_dot
from .fixtures import DESCRIPTIONS, FIXTURE_SOURCES, fixture
from .report import DEFAULT_PARAMS, FORMATS, analyze, emit
from .semigroup import BallTruncated, build_ball, cayley_dot

EX_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _positive(name: str, minimum: int = 1):
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}")
        if v < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be >= {minimum}, got {v}")
        return v
    return conv


def _epsilon(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"epsilon must be a number, got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return v


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", nargs="?", help="system description file")
    p.add_argument("--fixture", choices=list(FIXTURE_SOURCES), help="use a built-in system")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ifsends", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and admit a system file")
    p.add_argument("file")

    p = sub.add_parser("analyze", help="run the full analysis and write a report")
    _add_source(p)
    p.add_argument("--ball-depth", type=_positive("ball depth"))
    p.add_argument("--link-depth", type=_positive("link depth"))
    p.add_argument("--k-max", type=_positive("k-max", 2))
    p.add_argument("--margin", type=_positive("margin", 2))
    p.add_argument("--cloud-length", type=_positive("cloud length", 0))
    p.add_argument("--epsilon", type=_epsilon)
    p.add_argument("--resolution", type=_positive("resolution"))
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("render", help="write a PGM raster of the attractor")
    _add_source(p)
    p.add_argument("--cloud-length", type=_positive("cloud length", 0))
    p.add_argument("--resolution", type=_positive("resolution"), default=512)
    p.add_argument("--out", required=True)

    p = sub.add_parser("graph", help="write a Cayley ball or the link graph as DOT")
    p.add_argument("kind", choices=["cayley", "link"])
    _add_source(p)
    p.add_argument("--depth", type=_positive("depth"))
    p.add_argument("--out", required=True)

    sub.add_parser("fixtures", help="list built-in systems")

    p = sub.add_parser("verify", help="check every fixture against its expected outcomes")
    p.add_argument("--out", help="write the JSON summary here")
    p.add_argument("--constancy-depth", type=_positive("depth", 2), default=8)
    return parser


def _load(args) -> tuple[IfsDocument, dict]:
    if (args.file is None) == (args.fixture is None):
        raise UsageError(f"ifsends {args.command}: error: give exactly one of FILE or --fixture NAME")
    if args.fixture:
        fx = fixture(args.fixture)
        return fx.document, {**DEFAULT_PARAMS, **fx.params}
    return parse(Path(args.file).read_text()), dict(DEFAULT_PARAMS)


def _write(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _cmd_validate(args) -> int:
    doc = parse(Path(args.file).read_text())
    for d in doc.diagnostics:
        print(d, file=sys.stderr)
    s = doc.system
    print(f"ok: {len(s)} generators, dim {s.dim}, radicand {s.radicand}, "
          f"{len(doc.relations)} relations, lambda {s.lam:.6f}")
    return 0


def _cmd_analyze(args) -> int:
    doc, params = _load(args)
    for d in doc.diagnostics:
        print(d, file=sys.stderr)
    overrides = {"ball_depth": args.ball_depth, "link_depth": args.link_depth,
                 "k_max": args.k_max, "margin": args.margin, "L": args.cloud_length,
                 "epsilon": args.epsilon, "resolution": args.resolution}
    params.update({k: v for k, v in overrides.items() if v is not None})
    report = analyze(doc, params)
    _write(emit(report, args.format), args.out)
    for a in report.anomalies:
        what = a.get("relation") or a.get("verdict")
        print(f"anomaly ({a['kind']}): {what}", file=sys.stderr)
    return 2 if report.anomalies else 0


def _cmd_render(args) -> int:
    doc, params = _load(args)
    system = doc.system
    if system.dim > 2:
        print("error: rasters are only available in dimension 1 and 2", file=sys.stderr)
        return 1
    L = args.cloud_length if args.cloud_length is not None else params["L"]
    while L > 0 and len(system) ** L > DEFAULT_CLOUD_CAP:
        L -= 1
    cloud = sample_cloud(system, L)
    _write(to_pgm(render_raster(cloud, args.resolution)), args.out)
    print(f"rendered {len(cloud)} points at L={L}", file=sys.stderr)
    return 0


def _cmd_graph(args) -> int:
    doc, params = _load(args)
    system = doc.system
    if args.kind == "cayley":
        depth = args.depth or min(params["ball_depth"], 4)
        try:
            text = cayley_dot(build_ball(system, depth, cap=params["vertex_cap"]))
        except BallTruncated as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        text = link_dot(build_link_graph(system, args.depth or params["link_depth"]))
    _write(text.encode(), args.out)
    return 0


def _cmd_fixtures(args) -> int:
    width = max(map(len, FIXTURE_SOURCES))
    for name in FIXTURE_SOURCES:
        print(f"{name:<{width}}  {DESCRIPTIONS[name]}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_verify, verify_json

    checks = run_verify(args.constancy_depth, progress=lambda c: print(c.line(), flush=True))
    if args.out:
        Path(args.out).write_text(verify_json(checks))
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return 0 if not failed else 1


COMMANDS = {
    "validate": _cmd_validate,
    "analyze": _cmd_analyze,
    "render": _cmd_render,
    "graph": _cmd_graph,
    "fixtures": _cmd_fixtures,
    "verify": _cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        text = str(exc)
        if not text.startswith("usage:"):
            text = parser.format_usage() + text
        print(text, file=sys.stderr)
        return EX_USAGE
    except (DslError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
