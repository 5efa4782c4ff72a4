"""Command-line entry point: ``edapprox <command> ...``.

Exit status is 0 on success, 2 on invalid input and 3 on configuration
errors.  Standard output depends only on the inputs, the config and the
seed; wall-clock timings go to standard error.
"""
import argparse
import json
import sys

from . import __version__
from .applications import GapSpec, gap_distinguish, pattern_match
from .bench import bench, calibrate
from .config import RunConfig
from .driver import estimate_edit_distance
from .errors import ConfigError, DependencyError, EdApproxError, InvalidInputError
from .oracles import BitString, exact_edit_distance

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidInputError(message)


def read_string(path, alphabet):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if alphabet == "bytes":
        return BitString.from_bytes(data)
    text = data.replace(b"\n", b"")
    bad = set(text) - set(b"01")
    if bad:
        raise InvalidInputError(f"{path}: binary input may contain only 0, 1 and newlines")
    return BitString.from_text(text.decode("ascii"))


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"--sizes expects comma-separated integers, got {text!r}") from exc
    if not sizes or min(sizes) < 1:
        raise InvalidInputError("--sizes needs positive integers")
    return sizes


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    common.add_argument("--config", help="key=value constants file")
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    common.add_argument("--alphabet", choices=("binary", "bytes"), default=None)
    common.add_argument("--threads", type=int, default=None, help="worker threads per level")

    p = _Parser(prog="edapprox", description="Near-linear edit distance approximation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", parents=[common], help="estimate the edit distance of two files")
    d.add_argument("x")
    d.add_argument("y")
    d.add_argument("--with-exact", action="store_true", help="also run the exact DP (n <= oracle cap)")

    e = sub.add_parser("exact", parents=[common], help="exact edit distance by dynamic programming")
    e.add_argument("x")
    e.add_argument("y")

    g = sub.add_parser("gap", parents=[common], help="decide ed <= n^a versus ed >= n^b")
    g.add_argument("x")
    g.add_argument("y")
    g.add_argument("--alo", type=float, required=True)
    g.add_argument("--ahi", type=float, required=True)
    g.add_argument("--trials", type=int, default=None, help="sampled blocks")

    m = sub.add_parser("match", parents=[common], help="best approximate occurrence of P in T")
    m.add_argument("text")
    m.add_argument("pattern")
    m.add_argument("--reps", type=int, default=None, help="estimates per chunk")
    m.add_argument("--windows", action="store_true", help="list every window estimate")

    b = sub.add_parser("bench", parents=[common], help="time the estimator on planted pairs")
    b.add_argument("--sizes", default="4096,8192,16384")
    b.add_argument("--no-exact", action="store_true")

    c = sub.add_parser("calibrate", parents=[common], help="fit the multiplier and distortion table")
    c.add_argument("--sizes", default="1024,2048")
    c.add_argument("--pairs", type=int, default=3, help="pairs per edit density")
    c.add_argument("--out", help="write the fitted constants file here")
    return p


def _config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    upd = {}
    if args.seed is not None:
        upd["seed"] = args.seed
    if args.alphabet is not None:
        upd["alphabet"] = args.alphabet
    if args.threads is not None:
        upd["threads"] = args.threads
    if args.json:
        upd["output_format"] = "json"
    return cfg.with_(**upd) if upd else cfg


def _emit(cfg, out, payload, lines):
    if cfg.output_format == "json":
        payload = dict(payload, config_hash=cfg.config_hash(), seed=cfg.seed)
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        for key, val in lines:
            out.write(f"{key} {val}\n")


def _num(v):
    return repr(float(v)) if v is not None else "none"


def cmd_dist(args, cfg, out, err):
    x, y = read_string(args.x, cfg.alphabet), read_string(args.y, cfg.alphabet)
    est = estimate_edit_distance(x, y, cfg)
    payload = {"command": "dist", "estimate": est.value, "raw": est.raw, "n": est.n,
               "padded": est.padded, "branching": est.branching}
    lines = [("estimate", _num(est.value)), ("raw", _num(est.raw)), ("n", est.n),
             ("padded", est.padded), ("branching", est.branching)]
    if args.with_exact:
        if max(len(x), len(y)) > cfg.oracle_cap:
            raise InvalidInputError(f"--with-exact needs n <= oracle_cap={cfg.oracle_cap}")
        ed = exact_edit_distance(x, y)
        ratio = est.value / ed if ed else None
        payload.update(exact=ed, ratio=ratio)
        lines += [("exact", ed), ("ratio", _num(ratio))]
    _emit(cfg, out, payload, lines)
    err.write(f"seconds {est.seconds:.3f}\n")


def cmd_exact(args, cfg, out, err):
    ed = exact_edit_distance(read_string(args.x, cfg.alphabet), read_string(args.y, cfg.alphabet))
    if cfg.output_format == "json":
        _emit(cfg, out, {"command": "exact", "exact": ed}, [])
    else:
        out.write(f"{ed}\n")


def cmd_gap(args, cfg, out, err):
    x, y = read_string(args.x, cfg.alphabet), read_string(args.y, cfg.alphabet)
    res = gap_distinguish(x, y, GapSpec(args.alo, args.ahi, args.trials), cfg)
    p = res.plan
    payload = {"command": "gap", "decision": res.decision, "reads": res.reads, "blocks": p.blocks,
               "block_len": p.block_len, "threshold": p.threshold, "sampled": res.sampled,
               "estimates": {str(k): v for k, v in sorted(res.estimates.items())}}
    lines = [("decision", res.decision), ("reads", res.reads), ("blocks", p.blocks),
             ("block_len", p.block_len), ("threshold", _num(p.threshold))]
    lines += [(f"block_{k}", _num(v)) for k, v in sorted(res.estimates.items())]
    _emit(cfg, out, payload, lines)


def cmd_match(args, cfg, out, err):
    T, P = read_string(args.text, cfg.alphabet), read_string(args.pattern, cfg.alphabet)
    res = pattern_match(T, P, cfg, reps=args.reps)
    payload = {"command": "match", "best_start": res.best_start, "estimate": res.estimate,
               "chunks": res.chunks, "reps": res.reps}
    lines = [("best_start", res.best_start), ("estimate", _num(res.estimate)),
             ("chunks", res.chunks), ("reps", res.reps)]
    if args.windows:
        payload["per_window"] = [float(v) for v in res.per_window]
        lines += [(f"window_{i + 1}", _num(v)) for i, v in enumerate(res.per_window)]
    _emit(cfg, out, payload, lines)


def cmd_bench(args, cfg, out, err):
    rep = bench(_sizes(args.sizes), cfg, with_exact=not args.no_exact)
    det = rep.deterministic()
    lines = []
    for r in det["per_size"]:
        lines.append((f"n={r['n']}", f"edits={r['edits']} estimate={_num(r['estimate'])} "
                                     f"exact={r['exact'] if r['exact'] is not None else 'none'} "
                                     f"ratio={_num(r['ratio'])}"))
    for k, v in sorted(det["distortion"].items()):
        lines.append((f"ratio_{k}", _num(v)))
    _emit(cfg, out, dict(det, command="bench", backend=rep.backend), lines)
    for r in rep.per_size:
        err.write(f"time n={r.n} seconds={r.seconds:.3f}\n")
    for n, q in rep.time_ratios():
        err.write(f"doubling n={n} ratio={q:.3f}\n")


def cmd_calibrate(args, cfg, out, err):
    cal = calibrate(_sizes(args.sizes), cfg, pairs=args.pairs)
    if args.out:
        try:
            cal.config.save(args.out)
        except OSError as exc:
            raise InvalidInputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    payload = {"command": "calibrate", "calib_table": cal.config.calib_table,
               "distortion_table": cal.config.distortion_table, "calib_floor": cal.config.calib_floor}
    lines = [("calib_table", cal.config.calib_table), ("distortion_table", cal.config.distortion_table),
             ("calib_floor", _num(cal.config.calib_floor))]
    _emit(cfg, out, payload, lines)


COMMANDS = {"dist": cmd_dist, "exact": cmd_exact, "gap": cmd_gap, "match": cmd_match,
            "bench": cmd_bench, "calibrate": cmd_calibrate}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        COMMANDS[args.command](args, cfg, out, err)
    except (ConfigError, DependencyError) as exc:
        err.write(f"edapprox: config error: {exc}\n")
        return EXIT_CONFIG
    except InvalidInputError as exc:
        err.write(f"edapprox: {exc}\n")
        return EXIT_INPUT
    except EdApproxError as exc:
        err.write(f"edapprox: {exc}\n")
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
