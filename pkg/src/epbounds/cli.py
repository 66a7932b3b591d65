"""Command-line front end.

Exit codes: 0 verified (or success), 2 counterexample, 3 inconclusive,
64 usage error.  Machine-readable output goes to stdout, progress to stderr.
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import os
import sys
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from . import sieve as S
from .bounds import EtaBound, GapBound, RationalLogBound, SeriesLogBound, export_catalog_json, lookup
from .errors import EPBError, NoCrossingInRange
from .verify.identities import IDENTITIES, identity_residual
from .verify.mertens import mertens_estimate
from .verify.report import reports_to_csv
from .verify.sweeps import find_crossing, verify_bound

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64

DESK_LIMIT = 1e10
CACHE_LIMIT = 2e8
STATUS_EXIT = {"verified": EXIT_OK, "counterexample": EXIT_COUNTEREXAMPLE, "inconclusive": EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    threads: int = 1
    segment_size: int = S.DEFAULT_SEGMENT
    checkpoint_path: str | None = None
    output_format: str = "json"
    extended: bool = False

    def __post_init__(self):
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if self.segment_size < 2 or self.segment_size % 2:
            raise UsageError("--segment-size must be a positive even count")


def checkpoint_dir():
    return Path(os.environ.get("EPB_CHECKPOINT_DIR", "checkpoints"))


def _load_checkpoints(cfg: RunConfig):
    paths = [cfg.checkpoint_path] if cfg.checkpoint_path else sorted(glob.glob(str(checkpoint_dir() / "*.epbc")))
    recs = {}
    for p in paths:
        for r in S.read_checkpoints(p)[1]:
            recs[r.x] = r
    return [recs[x] for x in sorted(recs)]


def make_sieve(cfg: RunConfig, x_hi):
    cache = int(x_hi) + 1 if x_hi <= CACHE_LIMIT else 0
    return S.Sieve(checkpoints=_load_checkpoints(cfg), segment_size=cfg.segment_size, workers=cfg.threads,
                   cache_below=cache)


def _num(text):
    try:
        return float(text.replace(",", "").replace("_", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_inline(spec: str):
    """Inline bound such as ``rational:1,1,3.024334@48`` or ``eta:4,57.184@1091159``.

    Kinds: rational, rational-lower, series, series-lower, eta, gap.  The
    optional ``@x0`` gives the stated threshold.
    """
    if ":" not in spec:
        raise UsageError(f"inline bound needs KIND:COEFFS, got {spec!r}")
    kind, rest = spec.split(":", 1)
    rest, _, x0_text = rest.partition("@")
    try:
        nums = [float(v) for v in rest.split(",") if v.strip()]
        x0 = float(x0_text) if x0_text else None
    except ValueError:
        raise UsageError(f"bad number in {spec!r}") from None
    if not nums:
        raise UsageError(f"no coefficients in {spec!r}")
    base, _, variant = kind.partition("-")
    direction = "lower" if variant == "lower" else "upper"
    if variant not in ("", "lower"):
        raise UsageError(f"unknown bound kind {kind!r}")
    try:
        if base == "rational":
            return RationalLogBound(tuple(nums), direction=direction, x0=x0, id="inline")
        if base == "series":
            return SeriesLogBound(tuple(nums), direction=direction, x0=x0, id="inline")
        if base == "eta" and len(nums) == 2:
            return EtaBound(int(nums[0]), nums[1], x0 if x0 is not None else 2.0, id="inline")
        if base == "gap" and len(nums) == 2:
            return GapBound(nums[0], int(nums[1]), x0 if x0 is not None else 2.0, id="inline")
    except (ValueError, EPBError) as exc:
        raise UsageError(f"invalid inline bound {spec!r}: {exc}") from None
    raise UsageError(f"cannot parse inline bound {spec!r}")


def _resolve(args):
    if bool(args.ineq) == bool(args.bound):
        raise UsageError("give exactly one of --ineq or --bound")
    if args.ineq:
        try:
            e = lookup(args.ineq)
        except KeyError:
            raise UsageError(f"unknown inequality {args.ineq!r} (see the catalog subcommand)") from None
        return e.bound, e.id
    return parse_inline(args.bound), "inline"


def _check_range(cfg: RunConfig, lo, hi):
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 1 or hi <= lo:
        raise UsageError(f"bad range [{lo}, {hi}]")
    if hi > DESK_LIMIT and not cfg.extended:
        raise UsageError(f"range ends at {hi:.6g} > {DESK_LIMIT:.0e}; pass --extended to allow it")


def _schema(name):
    return json.loads(resources.files("epbounds").joinpath(f"data/schemas/{name}.schema.json").read_text())


def emit(doc, schema, fmt="json", out=None):
    """Validate ``doc`` against its schema and write it to stdout (or ``out``)."""
    jsonschema.validate(doc, _schema(schema))
    if fmt == "json":
        text = json.dumps(doc, indent=2)
    elif fmt == "text":
        text = "\n".join(f"{k}: {v}" for k, v in doc.items()) if isinstance(doc, dict) else json.dumps(doc)
    else:
        raise UsageError(f"format {fmt!r} not available here")
    _write(text + "\n", out)


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify(args, cfg):
    b, name = _resolve(args)
    lo = args.x_from if args.x_from is not None else getattr(b, "x0", None) or getattr(b, "x1", None)
    if lo is None:
        raise UsageError("--from is required for this bound")
    lo = max(float(lo), 1.0)
    _check_range(cfg, lo, args.x_to)
    _progress(f"verifying {name} on [{lo:.17g}, {args.x_to:.17g}]")
    rep = verify_bound(b, lo, args.x_to, make_sieve(cfg, args.x_to), side=args.side, ineq_id=name)
    _progress(f"{rep.status} in {rep.runtime_s:.2f}s")
    if cfg.output_format == "csv":
        _write(reports_to_csv([rep]), args.out)
    else:
        emit(rep.to_dict(), "report", cfg.output_format, args.out)
    return STATUS_EXIT[rep.status]


def default_hints(b):
    x0 = getattr(b, "x0", None) or getattr(b, "x1", None) or 2.0
    return 2.0, min(max(2.0 * x0, 2e6), DESK_LIMIT)


def cmd_crossing(args, cfg):
    b, name = _resolve(args)
    lo, hi = default_hints(b)
    lo = args.hint_lo if args.hint_lo is not None else lo
    hi = args.hint_hi if args.hint_hi is not None else hi
    _check_range(cfg, lo, hi)
    _progress(f"searching crossing of {name} in [{lo:.17g}, {hi:.17g}]")
    try:
        res = find_crossing(b, lo, hi, make_sieve(cfg, hi), side=args.side, ineq_id=name)
    except NoCrossingInRange as exc:
        _progress(f"no crossing: {exc}")
        return EXIT_INCONCLUSIVE
    _progress(f"N = {res.smallest_N}")
    emit(res.to_dict(), "crossing", cfg.output_format, args.out)
    return EXIT_OK if res.exact else EXIT_INCONCLUSIVE


def cmd_constants(args, cfg):
    x = int(args.x)
    if x < 2:
        raise UsageError("--x must be >= 2")
    _check_range(cfg, 2, max(10.0 * x, 1e8))
    m = mertens_estimate(x, make_sieve(cfg, max(10.0 * x, 1e8)))
    d = m.to_dict()
    d["B_err"] = d["B_err"] if math.isfinite(d["B_err"]) else "inf"
    d["E_err"] = d["E_err"] if math.isfinite(d["E_err"]) else "inf"
    emit(d, "constants", cfg.output_format, args.out)
    return EXIT_OK


def cmd_catalog(args, cfg):
    emit(export_catalog_json(), "catalog", "json", args.out)
    return EXIT_OK


def cmd_identity(args, cfg):
    top = args.x if args.which in ("eq1.7", "eq2.2") else (args.x_max or max(10 * args.x, 1e8))
    _check_range(cfg, 2, max(top, 3))
    r = identity_residual(args.which, args.x, make_sieve(cfg, top), X_max=args.x_max)
    d = {k: (float(v) if hasattr(v, "dtype") else v) for k, v in r.to_dict().items()}
    d["consistent"] = bool(d["consistent"])
    emit(d, "identity", cfg.output_format, args.out)
    return EXIT_OK if d["consistent"] else EXIT_INCONCLUSIVE


def cmd_sieve_checkpoint(args, cfg):
    to = int(args.to)
    step = int(args.step)
    _check_range(cfg, 1, max(to, 2))
    out = Path(args.out) if args.out else checkpoint_dir() / f"step{step}.epbc"
    out.parent.mkdir(parents=True, exist_ok=True)
    resume = str(out) if args.resume and out.exists() else None
    stop = threading.Event()
    result = {}

    def run():
        try:
            result["records"] = S.checkpoint_run(to, step, resume_from=resume, path=str(out), workers=cfg.threads,
                                                 segment_size=cfg.segment_size,
                                                 progress=lambda x, m: _progress(f"{x}/{m}"), stop_event=stop)
        except BaseException as exc:  # re-raised in the main thread
            result["error"] = exc

    t = threading.Thread(target=run, daemon=True)
    t.start()
    try:
        while t.is_alive():
            t.join(0.2)
    except KeyboardInterrupt:
        _progress("interrupted; finishing the current record")
        stop.set()
        t.join()
        return 130
    if "error" in result:
        raise result["error"]
    if args.csv:
        with open(args.csv, "w") as fh:
            S.export_csv(result["records"], fh)
    _progress(f"wrote {len(result['records'])} checkpoints to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = _Parser(prog="epbounds", description="Check explicit prime-counting bounds against sieve data.")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads (default: all cores)")
    p.add_argument("--segment-size", type=int, default=S.DEFAULT_SEGMENT, help="odd entries per sieve segment")
    p.add_argument("--checkpoint", help="checkpoint file (default: every *.epbc in $EPB_CHECKPOINT_DIR or ./checkpoints)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json", help="output format")
    p.add_argument("--extended", action="store_true", help="allow ranges above 1e10")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def bound_args(sp):
        sp.add_argument("--ineq", help="catalog id, e.g. thm103 or cor801:1.08366")
        sp.add_argument("--bound", help="inline bound, e.g. rational:1,1.08366@1526671 or eta:4,57.184@1091159")
        sp.add_argument("--side", choices=("lower", "upper", "both"), default=None,
                        help="side of a theta bound (verify default both, crossing default lower)")
        sp.add_argument("--out", help="write the report here instead of stdout")

    v = sub.add_parser("verify", help="sweep an inequality over a range")
    bound_args(v)
    v.add_argument("--from", dest="x_from", type=_num, help="start of range (default: stated threshold)")
    v.add_argument("--to", dest="x_to", type=_num, required=True, help="end of range")
    v.set_defaults(func=cmd_verify, default_side="both")

    c = sub.add_parser("crossing", help="smallest N from which an inequality holds")
    bound_args(c)
    c.add_argument("--hint-lo", type=_num, help="lower end of the search (default 2)")
    c.add_argument("--hint-hi", type=_num, help="upper end (default min(max(2 x0, 2e6), 1e10))")
    c.set_defaults(func=cmd_crossing, default_side="lower")

    k = sub.add_parser("constants", help="prime sums and the constants B and E at x")
    k.add_argument("--x", type=_num, required=True)
    k.add_argument("--out")
    k.set_defaults(func=cmd_constants)

    g = sub.add_parser("catalog", help="dump the bound catalog")
    g.add_argument("--export", choices=("json",), default="json")
    g.add_argument("--out")
    g.set_defaults(func=cmd_catalog)

    i = sub.add_parser("identity", help="residual of an integral identity at x")
    i.add_argument("--which", choices=IDENTITIES, required=True)
    i.add_argument("--x", type=_num, required=True)
    i.add_argument("--x-max", type=_num, default=None, help="truncation point for integrals to infinity")
    i.add_argument("--out")
    i.set_defaults(func=cmd_identity)

    s = sub.add_parser("sieve-checkpoint", help="write (pi, theta, psi) checkpoints every STEP up to TO")
    s.add_argument("--to", type=_num, required=True)
    s.add_argument("--step", type=_num, default=1e9)
    s.add_argument("--out", help="checkpoint file (default: $EPB_CHECKPOINT_DIR/step<STEP>.epbc)")
    s.add_argument("--resume", action="store_true", help="continue an existing file")
    s.add_argument("--csv", help="also export the checkpoints as CSV")
    s.set_defaults(func=cmd_sieve_checkpoint)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "side", "x") is None:
        args.side = args.default_side
    try:
        cfg = RunConfig(args.threads, args.segment_size, args.checkpoint, args.format, args.extended)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"epbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EPBError as exc:
        print(f"epbounds: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("epbounds: interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
