"""Command-line entry point: ``lagmachine <subcommand> [flags]``.

Exit status is 0 on success, 1 when a verification fails and 2 on a usage
or I/O error.  Reports go to ``--out`` when given, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from lagmachine import compiler, control, decoding, lag, plotting
from lagmachine.machine import MachineError, TuringMachine, run_tm
from lagmachine.registry import BUILTIN, resolve_machine

log = logging.getLogger("lagmachine")

DEFAULT_MAX_ITERS = 10**7
DEFAULT_MAX_STEPS = 10**5


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------------


def positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def int_range(text: str) -> range:
    """``lo..hi`` (inclusive) or a single integer."""
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}") from None
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(a, b + 1)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1) + "\n"


def emit(obj: Any, out: str | None) -> None:
    text = dumps(obj)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def write_jsonl(rows, out: str | None) -> None:
    fh = open(out, "w", encoding="utf-8", newline="\n") if out else None
    try:
        for row in rows:
            line = json.dumps(row) + "\n"
            (fh or sys.stdout).write(line)
    finally:
        if fh:
            fh.close()


def check_readable(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise UsageError(f"no such file: {p}")


def check_writable(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not Path(p).resolve().parent.is_dir():
            raise UsageError(f"directory does not exist for output {p}")


def split_word(text: str) -> list[str]:
    """Whitespace-separated symbols, or one symbol per character."""
    return text.split() if any(c.isspace() for c in text) else list(text)


def load_system(path: str) -> tuple[lag.LagSystem, Callable[[str], Any]]:
    """Load a Lag file; triple symbols (``mem|state|ctrl``) are parsed as such."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    names = obj.get("alphabet") or [s for r in obj.get("rules", []) for s in r.get("lhs", [])]
    if names and all(isinstance(s, str) and s.count("|") == 2 for s in names):
        return compiler.load_compiled_json(obj), compiler.Triple.parse
    return lag.from_json(obj), str


def machine_system(args) -> tuple[TuringMachine, compiler.CompiledSystem]:
    tm = resolve_machine(args.tm)
    return tm, compiler.compile_machine(tm, literal=getattr(args, "literal", False))


def system_and_word(args) -> tuple[lag.LagSystem, list]:
    """The Lag system and start word from either ``--sys`` or ``--tm``."""
    if args.sys:
        sysm, parse = load_system(args.sys)
        if args.input is None:
            raise UsageError("--input is required with --sys")
        return sysm, [parse(s) for s in split_word(args.input)]
    if args.tm:
        tm, comp = machine_system(args)
        if args.input is None:
            raise UsageError("--input is required with --tm")
        return comp.sys, list(compiler.initial_string(tm, split_word(args.input), args.i0))
    raise UsageError("one of --sys or --tm is required")


def figures_dir(path: str | None) -> Path | None:
    if path is None:
        return None
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    return d


# -- subcommands -------------------------------------------------------------------


def cmd_compile(args) -> int:
    check_writable(args.out)
    _, comp = machine_system(args)
    if args.out:
        comp.dump(args.out)
        sys.stdout.write(dumps({"census": comp.census, "reference": comp.census_delta()}))
    else:
        sys.stdout.write(dumps(comp.to_json()))
    return 0


def cmd_run_tm(args) -> int:
    check_writable(args.out)
    if args.input is None:
        raise UsageError("--input is required")
    tm = resolve_machine(args.tm)
    trace = run_tm(tm, split_word(args.input), args.i0, args.max_steps, stride=args.stride)
    if args.out:
        write_jsonl((r.to_json() for r in trace.records), args.out)
    st = trace.final
    sys.stdout.write(
        dumps({"reason": trace.reason.value, "steps": st.steps, "memory": st.tape, "head": st.head, "state": st.state})
    )
    return 0


def cmd_run_lag(args) -> int:
    check_readable(args.sys)
    check_writable(args.out)
    sysm, word = system_and_word(args)
    trace = lag.run_lag(sysm, word, args.max_iters, stride=args.stride)
    if args.out:
        write_jsonl((r.to_json() for r in trace.records), args.out)
    final = trace.final
    sys.stdout.write(
        dumps(
            {
                "reason": trace.reason.value,
                "iterations": trace.iterations,
                "appended": final.appended,
                "length": len(final.string),
                "final": [str(s) for s in final.string],
            }
        )
    )
    return 0


def cmd_decode(args) -> int:
    check_readable(args.sys)
    check_writable(args.out)
    sysm, word = system_and_word(args)
    model = decoding.make_table_model(sysm)
    trace = decoding.ext_decode(model, word, sysm.halt, args.max_iters, stride=args.stride)
    if args.out:
        write_jsonl(
            (
                {"k": r.k, "context": [str(s) for s in r.context], "response": [str(s) for s in r.response], "ell": r.ell}
                for r in trace.records
            ),
            args.out,
        )
    sys.stdout.write(
        dumps(
            {
                "reason": trace.reason,
                "iterations": trace.iterations,
                "appended": trace.appended,
                "length": len(trace.sequence),
                "tail": [str(s) for s in trace.tail()],
            }
        )
    )
    return 0


def cmd_verify_equivalence(args) -> int:
    check_writable(args.out)
    if args.input is None:
        raise UsageError("--input is required")
    tm, comp = machine_system(args)
    report = compiler.verify_equivalence(tm, split_word(args.input), args.i0, args.max_steps, comp)
    emit(report.to_json(), args.out)
    fig = figures_dir(args.figures)
    if fig is not None:
        plotting.write_gaps(report, fig)
    log.info("equivalence %s after %d steps: %s", "passed" if report.passed else "FAILED", report.tm_steps, report.message)
    return 0 if report.passed else 1


def cmd_verify_rotation(args) -> int:
    check_writable(args.out)
    if args.n.start < 3:
        raise UsageError("--n must start at 3 or more")
    report = control.verify_rotation_laws(args.n, tuple(args.base), placements=args.placements)
    emit(report.to_json(), args.out)
    fig = figures_dir(args.figures)
    if fig is not None:
        plotting.write_rotation(report, fig)
    return 0 if report.passed else 1


def cmd_verify_transcript(args) -> int:
    if not args.sys or not args.transcript:
        raise UsageError("--sys and --transcript are required")
    check_readable(args.sys, args.transcript)
    check_writable(args.out)
    sysm, _ = load_system(args.sys)
    codec = decoding.build_codec(sysm)
    records = decoding.read_transcript(args.transcript)
    report = decoding.verify_transcript(sysm, codec, records)
    emit(report.to_json(), args.out)
    return 0 if report.ok else 1


def cmd_export_prompts(args) -> int:
    check_readable(args.sys, args.preamble)
    check_writable(args.out, args.transcript)
    census = None
    if args.sys:
        sysm, _ = load_system(args.sys)
    elif args.tm:
        _, comp = machine_system(args)
        sysm, census = comp.sys, comp.census
    else:
        raise UsageError("one of --sys or --tm is required")
    preamble = Path(args.preamble).read_text(encoding="utf-8") if args.preamble else ""
    codec = decoding.build_codec(sysm)
    pack = decoding.emit_prompt_pack(sysm, codec, preamble, args.repeat, census=census)
    if args.out:
        pack.write(args.out)
        sys.stdout.write(dumps({"lines": len(pack.rule_lines), "repeat": pack.repeat, **pack.metadata}))
    else:
        sys.stdout.write(pack.render())
    if args.transcript:
        decoding.write_transcript(decoding.oracle_transcript(sysm, codec), args.transcript)
    return 0


def cmd_stats(args) -> int:
    if not args.out:
        raise UsageError("--out <directory> is required")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _, comp = machine_system(args)
    census = comp.census
    delta = comp.census_delta()
    written = plotting.write_census(census, delta, out, figures=not args.no_figures)
    report = control.verify_rotation_laws(args.n, ("0", "1"))
    written += plotting.write_rotation(report, out, figures=not args.no_figures)
    summary = {
        "machine": comp.source.name,
        "census": census,
        "reference": delta,
        "rotation": {"passed": report.passed, "total": len(report.records)},
        "files": sorted(p.name for p in written),
    }
    (out / "stats.json").write_text(dumps(summary), encoding="utf-8")
    sys.stdout.write(dumps(summary))
    return 0 if report.passed else 1


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lagmachine", description="Turing machines, Lag systems and autoregressive decoding.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="subcommand", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.set_defaults(func=fn)
        return sp

    def tm_flags(sp, default="u15_2"):
        sp.add_argument("--tm", default=default, help=f"built-in name ({', '.join(BUILTIN)}) or machine JSON path")
        sp.add_argument("--literal", action="store_true", help="compile the first left-move rule over tape symbols only")

    def tape_flags(sp):
        sp.add_argument("--input", help="input tape (characters, or whitespace-separated symbols)")
        sp.add_argument("--i0", type=positive, default=1, help="initial head cell (1-based)")

    sp = add("compile", cmd_compile, "compile a machine into a (2,2) Lag system")
    tm_flags(sp)
    sp.add_argument("--out", help="compiled system JSON")

    sp = add("run-tm", cmd_run_tm, "run a Turing machine")
    tm_flags(sp)
    tape_flags(sp)
    sp.add_argument("--max-steps", type=nonnegative, default=DEFAULT_MAX_STEPS)
    sp.add_argument("--stride", type=nonnegative, default=1, help="keep every stride-th step record (0: none)")
    sp.add_argument("--out", help="JSONL step trace")

    for name, fn, text in (
        ("run-lag", cmd_run_lag, "run a Lag system"),
        ("decode", cmd_decode, "extended autoregressive decoding with the rule-table model"),
    ):
        sp = add(name, fn, text)
        sp.add_argument("--sys", help="Lag system JSON")
        tm_flags(sp, default=None)
        tape_flags(sp)
        sp.add_argument("--max-iters", type=nonnegative, default=DEFAULT_MAX_ITERS)
        sp.add_argument("--stride", type=nonnegative, default=1, help="keep every stride-th record (0: none)")
        sp.add_argument("--out", help="JSONL trace")

    sp = add("verify-equivalence", cmd_verify_equivalence, "check a compiled system against its machine step by step")
    tm_flags(sp)
    tape_flags(sp)
    sp.add_argument("--max-steps", type=nonnegative, default=DEFAULT_MAX_STEPS)
    sp.add_argument("--out", help="EquivalenceReport JSON")
    sp.add_argument("--figures", metavar="DIR", help="write gaps.csv and gaps.png here")

    sp = add("verify-rotation", cmd_verify_rotation, "check the rotation laws of the control rule sets")
    sp.add_argument("--n", type=int_range, default=range(3, 11), help="ring sizes lo..hi (default 3..10)")
    sp.add_argument("--base", default="01", help="data symbols, one per character")
    sp.add_argument("--placements", action="store_true", help="start the tag at every position, not just n-1")
    sp.add_argument("--out", help="LawReport JSON")
    sp.add_argument("--figures", metavar="DIR", help="write rotation.csv and rotation.png here")

    sp = add("verify-transcript", cmd_verify_transcript, "check a model transcript against a rule table")
    sp.add_argument("--sys", help="Lag system JSON")
    sp.add_argument("--transcript", help="transcript JSONL")
    sp.add_argument("--out", help="VerifyReport JSON")

    sp = add("export-prompts", cmd_export_prompts, "write a prompt pack (and optionally the oracle transcript)")
    sp.add_argument("--sys", help="Lag system JSON")
    tm_flags(sp, default=None)
    sp.add_argument("--preamble", help="text file prepended to the rule lines")
    sp.add_argument("--repeat", type=positive, default=1, help="repeat the rule block this many times")
    sp.add_argument("--transcript", help="also write the oracle transcript here")
    sp.add_argument("--out", help="prompt pack path")

    sp = add("stats", cmd_stats, "census and rotation-law tables (CSV) and figures (PNG)")
    tm_flags(sp)
    sp.add_argument("--n", type=int_range, default=range(3, 11), help="ring sizes lo..hi (default 3..10)")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--no-figures", action="store_true", help="CSV and JSON only")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lagmachine: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, lag.LagError, MachineError, decoding.DecodingError) as exc:
        print(f"lagmachine: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
