"""Command-line front end.

Exit codes: 0 success or claim holds, 1 mathematical finding (counterexample
or mismatch), 2 usage error, 3 an Undetermined local verdict blocked the
conclusion.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from polyreg.classify import NoTheoremApplies, match_family, verify_family_claim
from polyreg.explore import (CacheError, cache_append, cache_load, default_cache_dir,
                             escalate_universal, merge_records, survey_regular)
from polyreg.localsolve import (Status, is_locally_universal, is_zp_universal, local_represents)
from polyreg.polynumber import FormError, ShiftedForm, evaluate_form
from polyreg.represent import represented_set, represents, regularity_report
from polyreg.residues import summarize
from polyreg.watson import IterationLimit, LambdaError, lambda_2, lambda_full, lambda_p, lambda_tilde

EXIT_OK, EXIT_FINDING, EXIT_USAGE, EXIT_UNDETERMINED = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    """Resolved settings: flags override environment, environment overrides defaults.

    Environment: ``POLYREG_FORMAT``, ``POLYREG_CAP`` (deepening cap for
    every prime), ``POLYREG_BOUND``, ``POLYREG_CACHE``, ``POLYREG_SHARDS``.
    """

    output_format: str = "json"
    cap: int | None = None  # None: 20 at p = 2, 12 at odd p
    bound: int = 1000
    cache_dir: Path | None = None
    shards: int = 1
    shard: int = 0

    @classmethod
    def resolve(cls, args: argparse.Namespace, env: dict[str, str] | None = None) -> "CliConfig":
        env = dict(os.environ if env is None else env)
        cfg = cls()
        cfg.output_format = env.get("POLYREG_FORMAT", cfg.output_format)
        if "POLYREG_CAP" in env:
            cfg.cap = int(env["POLYREG_CAP"])
        if "POLYREG_BOUND" in env:
            cfg.bound = int(env["POLYREG_BOUND"])
        if "POLYREG_SHARDS" in env:
            cfg.shards = int(env["POLYREG_SHARDS"])
        cfg.cache_dir = default_cache_dir()
        for name, attr in (("format", "output_format"), ("cap", "cap"), ("bound", "bound"),
                           ("shards", "shards"), ("shard", "shard")):
            value = getattr(args, name, None)
            if value is not None:
                setattr(cfg, attr, value)
        if cfg.output_format not in ("json", "csv", "text"):
            raise UsageError(f"unknown output format {cfg.output_format!r}")
        return cfg


def _form(text: str) -> ShiftedForm:
    try:
        return ShiftedForm.parse(text)
    except FormError as exc:
        raise UsageError(str(exc)) from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _emit(data: dict | list, cfg: CliConfig) -> None:
    print(json.dumps(data, indent=None if cfg.output_format == "json" else 2, sort_keys=True))


def _status_exit(status: Status) -> int:
    return EXIT_UNDETERMINED if status is Status.UNDETERMINED else EXIT_OK


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_eval(args, cfg) -> int:
    form = _form(args.form)
    x = _ints(args.x)
    try:
        print(evaluate_form(form, x))
    except FormError as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


def cmd_local(args, cfg) -> int:
    form = _form(args.form)
    v = local_represents(form, args.n, args.prime, cfg.cap)
    _emit(v.to_json(), cfg)
    return _status_exit(v.status)


def cmd_local_universal(args, cfg) -> int:
    form = _form(args.form)
    if args.prime:
        v = is_zp_universal(form, args.prime, cfg.cap)
    else:
        v = is_locally_universal(form, cfg.cap)
    out = {"form": form.spec(), "status": v.status.value}
    if v.p:
        out["deciding_prime"] = v.p
    if v.note:
        out["note"] = v.note
    _emit(out, cfg)
    return _status_exit(v.status)


def cmd_lambda(args, cfg) -> int:
    form = _form(args.form)
    try:
        if args.full:
            out, trail = lambda_full(form, args.max_iter, cfg.cap)
        elif args.prime is None:
            raise UsageError("--prime is required unless --full is given")
        elif args.iterate:
            out, trail = lambda_tilde(form, args.prime, args.max_iter, cfg.cap)
        else:
            out, rec = lambda_2(form) if args.prime == 2 else lambda_p(form, args.prime)
            trail = [rec]
    except LambdaError as exc:
        raise UsageError(str(exc)) from None
    except IterationLimit as exc:
        _emit({"error": str(exc), "trail": [r.to_json() for r in exc.trail]}, cfg)
        return EXIT_UNDETERMINED
    _emit({"input": form.spec(), "output": out.spec(), "trail": [r.to_json() for r in trail]}, cfg)
    return EXIT_OK


def cmd_represented(args, cfg) -> int:
    form = _form(args.form)
    if args.n is not None:
        w = represents(form, args.n)
        _emit({"form": form.spec(), "n": args.n, "witness": list(w) if w else None}, cfg)
        return EXIT_OK
    bits = represented_set(form, cfg.bound)
    _emit({"form": form.spec(), "represented": summarize(bits, cfg.bound)}, cfg)
    return EXIT_OK


def cmd_regular(args, cfg) -> int:
    form = _form(args.form)
    report = regularity_report(form, cfg.bound, cfg.cap)
    if cfg.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["form", "bound", "status", "first_counterexample",
                         "counterexamples", "undetermined"])
        writer.writerow([form.spec(), cfg.bound, report.status_text(),
                         report.first_counterexample if report.counterexamples else "",
                         " ".join(map(str, report.counterexamples)),
                         " ".join(map(str, report.undetermined))])
        sys.stdout.write(buf.getvalue())
    else:
        _emit(report.to_json(), cfg)
    if report.counterexamples:
        return EXIT_FINDING
    return EXIT_UNDETERMINED if report.undetermined else EXIT_OK


def cmd_classify(args, cfg) -> int:
    form = _form(args.form)
    tags = match_family(form)
    checks = [verify_family_claim(form, t, cfg.bound, cfg.cap) for t in tags]
    universal = is_locally_universal(form, cfg.cap)
    out = {
        "form": form.spec(),
        "locally_universal": universal.status.value,
        "tags": [t.to_json() for t in tags],
        "predicted_classes": [t.classes.to_json() for t in tags],
        "local_match": [c.local_match for c in checks],
        "global_consistent": [c.global_consistent for c in checks],
        "defects": [d for c in checks for d in c.defects],
    }
    _emit(out, cfg)
    if any(t.applicable and not c.local_match for t, c in zip(tags, checks)):
        return EXIT_FINDING
    return EXIT_OK


def cmd_search_universal(args, cfg) -> int:
    bound = args.bound if args.bound is not None else 10_000
    result = escalate_universal(args.m, args.domain, args.max_rank, bound,
                                shifted=args.shifted, cap=cfg.cap)
    _emit(result.to_json(), cfg)
    return EXIT_OK


def cmd_survey(args, cfg) -> int:
    if args.merge:
        try:
            groups = [cache_load(p) for p in args.merge]
        except CacheError as exc:
            print(f"polyreg: {exc}", file=sys.stderr)
            return EXIT_USAGE
        merged = merge_records(*groups)
        out = Path(args.out) if args.out else None
        if out is None:
            for rec in merged:
                print(json.dumps(rec.to_json(), sort_keys=True))
        else:
            if out.exists():
                out.unlink()
            cache_append(out, merged)
        return EXIT_OK
    for name in ("m", "rank", "coeff_bound"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")
    try:
        records = survey_regular(args.m, args.rank, args.coeff_bound, cfg.bound, args.domain,
                                 cfg.shards, cfg.shard, args.jobs, args.override, cfg.cap)
    except NoTheoremApplies as exc:
        raise UsageError(f"{exc} (pass --override to survey anyway)") from None
    out = Path(args.out) if args.out else (
        cfg.cache_dir / f"survey_m{args.m}_n{args.rank}_c{args.coeff_bound}_B{cfg.bound}"
        f"_{args.domain}_shard{cfg.shard}of{cfg.shards}.jsonl")
    cache_append(out, records)
    flagged = [r.form for r in records if r.flagged]
    summary = {
        "out": str(out),
        "records": len(records),
        "consistent": sum(1 for r in records if r.first_cx is None),
        "outside_classification": flagged,
    }
    _emit(summary, cfg)
    return EXIT_FINDING if flagged else EXIT_OK


def cmd_selftest(args, cfg) -> int:
    from polyreg.selftest import run_selftest

    failed = 0
    for name, ok, detail in run_selftest(args.seed):
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        failed += not ok
    return EXIT_FINDING if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polyreg", description="Regular m-gonal forms toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, func, help_text: str, form: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        if form:
            p.add_argument("--form", required=True, help="m=<int>;a=<ints>;r=<ints>;domain=Z|N")
        p.add_argument("--format", choices=["json", "csv", "text"], default=None)
        p.add_argument("--cap", type=int, default=None, help="local deepening cap")
        return p

    p = add("eval", cmd_eval, "evaluate a form at a point")
    p.add_argument("--x", required=True)
    p = add("local", cmd_local, "p-adic representation of one integer")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--prime", type=int, required=True)
    p = add("local-universal", cmd_local_universal, "Z_p- or local universality")
    p.add_argument("--prime", type=int, default=None)
    p = add("lambda", cmd_lambda, "lambda transformation")
    p.add_argument("--prime", type=int, default=None)
    p.add_argument("--iterate", action="store_true")
    p.add_argument("--full", action="store_true", help="compose over all bad primes")
    p.add_argument("--max-iter", type=int, default=64)
    p = add("represented", cmd_represented, "represented set or a witness")
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p = add("regular", cmd_regular, "regularity report up to a bound")
    p.add_argument("--bound", type=int, default=None)
    p = add("classify", cmd_classify, "family tags and their verification")
    p.add_argument("--bound", type=int, default=None)
    p = add("search-universal", cmd_search_universal, "escalation search", form=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--max-rank", type=int, default=6)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--domain", choices=["Z", "N"], default="Z")
    p.add_argument("--shifted", action="store_true")
    p = add("survey", cmd_survey, "regularity survey over a coefficient grid", form=False)
    p.add_argument("--m", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--coeff-bound", type=int)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--domain", choices=["Z", "N"], default="Z")
    p.add_argument("--out", default=None)
    p.add_argument("--shards", type=int, default=None)
    p.add_argument("--shard", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--override", action="store_true", help="run outside the theorem windows")
    p.add_argument("--merge", nargs="+", default=None, metavar="FILE",
                   help="merge cache files instead of surveying")
    p = add("selftest", cmd_selftest, "run the invariant suites", form=False)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = CliConfig.resolve(args)
        return args.func(args, cfg)
    except (UsageError, FormError, ValueError) as exc:
        print(f"polyreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def dispatch(argv: Sequence[str]) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
