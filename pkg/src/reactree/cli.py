"""Command-line front end.

Exit codes: 0 success, 1 failure (or a run still Running at the tick cap,
or a tree with validation errors), 2 engine, parse or connection error.
"""

import argparse
import logging
import sys

from . import treefile
from .clock import make_clock
from .core import TickContext
from .errors import EngineError
from .expand import expand_memory_node
from .registry import builtin_registry
from .runtime import RunConfig, run
from .scenario import make_world, simulate_fetch
from .skillwire.client import LoopbackConnection, SocketConnection, register_skill_leaves
from .skillwire.server import SkillServer, serve
from .status import SUCCESS
from .trace import TraceSink

log = logging.getLogger("reactree")


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _run_flags(p, max_ticks=None):
    p.add_argument("--tick-hz", type=_positive_float, default=10.0, help="root tick rate (default 10)")
    p.add_argument("--max-ticks", type=_positive_int, default=max_ticks, help="stop after this many ticks")
    p.add_argument("--trace", metavar="PATH", help="write the execution trace (csv) here")
    p.add_argument("--endpoint", metavar="HOST:PORT", help="use an external skill server")
    p.add_argument("--seed", type=int, default=0, help="seed for the simulated world")
    p.add_argument("--clock", choices=("sim", "real"), default="sim", help="clock mode (default sim)")
    p.add_argument("--halt-timeout-ms", type=_positive_float, default=1000.0)


def build_parser():
    parser = argparse.ArgumentParser(prog="reactree", description="Behavior-tree engine and simulated skills.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="tick a tree file until it finishes")
    p.add_argument("tree")
    _run_flags(p)
    p.add_argument("--loop", action="store_true", help="keep ticking after a terminal root status")

    p = sub.add_parser("validate", help="check a tree file")
    p.add_argument("tree")

    p = sub.add_parser("expand", help="rewrite memory nodes into memoryless ones")
    p.add_argument("tree")
    p.add_argument("-o", "--output", help="write here instead of stdout")

    p = sub.add_parser("serve-skills", help="serve the simulated skills over TCP")
    p.add_argument("--endpoint", default="127.0.0.1:7600", metavar="HOST:PORT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tick-hz", type=_positive_float, default=10.0, help="skill step rate")

    p = sub.add_parser("simulate-fetch", help="run the fetch mission against the simulated world")
    p.add_argument("--tree", help="mission tree (default: the shipped fetch mission)")
    _run_flags(p, max_ticks=600)
    p.add_argument("--fail-nav", action="store_true", help="make every navigation goal unreachable")
    p.add_argument("--drop-object-at-tick", type=_positive_int, metavar="K",
                   help="drop the object at the first tick >= K once it has been held for a whole tick")
    return parser


def skill_registry(conn=None):
    return register_skill_leaves(builtin_registry(), conn)


def cmd_run(args):
    model = treefile.parse_file(args.tree)
    sink = TraceSink(args.trace)
    ctx = TickContext(sink=sink, clock=make_clock(args.clock))
    server = None
    if args.endpoint:
        conn = SocketConnection.from_endpoint(args.endpoint)
    else:
        server = SkillServer(make_world(args.seed), clock=ctx.clock, step_period=1.0 / args.tick_hz)
        conn = LoopbackConnection(server)
    try:
        tree = treefile.instantiate(model, skill_registry(conn), ctx=ctx)
        cfg = RunConfig(args.tick_hz, args.halt_timeout_ms, args.max_ticks, ctx.clock, args.loop)
        report = run(tree, cfg)
    finally:
        if server is not None:
            server.shutdown()
        conn.close()
        sink.close()
    sys.stdout.write(report.format())
    return 0 if report.final_status is SUCCESS else 1


def cmd_validate(args):
    model = treefile.parse_file(args.tree)
    diagnostics = treefile.validate(model, skill_registry())
    for diag in diagnostics:
        print(diag)
    if treefile.errors_only(diagnostics):
        return 1
    print(f"{args.tree}: ok")
    return 0


def cmd_expand(args):
    text = treefile.serialize(expand_memory_node(treefile.parse_file(args.tree)))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args):
    server = serve(make_world(args.seed), endpoint=args.endpoint, step_period=1.0 / args.tick_hz)
    print(f"serving skills on {server.endpoint}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def cmd_simulate(args):
    outcome = simulate_fetch(
        tree=args.tree,
        seed=args.seed,
        fail_nav=args.fail_nav,
        drop_at=args.drop_object_at_tick,
        tick_hz=args.tick_hz,
        max_ticks=args.max_ticks,
        trace=args.trace,
        endpoint=args.endpoint,
        clock=args.clock,
        halt_timeout_ms=args.halt_timeout_ms,
    )
    sys.stdout.write(outcome.format())
    return outcome.exit_code


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "expand": cmd_expand,
    "serve-skills": cmd_serve,
    "simulate-fetch": cmd_simulate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (EngineError, OSError, ValueError) as exc:
        print(f"reactree {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
