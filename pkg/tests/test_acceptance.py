"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s``; the lines are
also collected into the "acceptance criteria" section of the pytest summary.
"""

import itertools
import time

import pytest

from lagmachine import (
    build_codec,
    build_u15_2,
    classify,
    compile_machine,
    emit_prompt_pack,
    ext_decode,
    initial_string,
    make_table_model,
    run_lag,
    verify_equivalence,
    verify_transcript,
)
from lagmachine.compiler import FAMILY_NAMES, REFERENCE_CENSUS
from lagmachine.control import verify_rotation_laws
from lagmachine.decoding import oracle_transcript, parse_rule_lines
from lagmachine.machine import RIGHT, Transition
from lagmachine.registry import build_expander, build_right_walker, build_zigzag
from support import ACCEPTANCE_LINES, random_suite
from test_machine import reference_cells


def report(name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def u15():
    return build_u15_2()


@pytest.fixture(scope="module")
def compiled(u15):
    return compile_machine(u15)


def test_rotation_law_suite():
    t0 = time.perf_counter()
    canonical = verify_rotation_laws(range(3, 11), ("0", "1"))
    every = verify_rotation_laws(range(3, 11), ("0", "1"), placements=True)
    elapsed = time.perf_counter() - t0
    ok = canonical.passed and every.passed and elapsed < 5
    failures = [f"{r.law}@n={r.n},j={r.placement}: {r.observed}" for r in every.failures()][:3]
    report(
        "rotation laws n=3..10",
        ok,
        f"{len(canonical.records)} canonical + {len(every.records)} all-placement checks, "
        f"{len(every.failures())} failures {failures}, {elapsed:.2f}s",
    )
    assert ok


def test_correspondence_gap_laws(u15, compiled):
    t0 = time.perf_counter()
    cases = [
        ("right-mover", build_right_walker(), "11", 1, 50),
        ("zigzag", build_zigzag(), "s0110e", 2, 60),
        ("expander", build_expander(), "01", 2, 60),
    ]
    lines, ok = [], True
    for name, tm, tape, i0, steps in cases:
        r = verify_equivalence(tm, tape, i0, steps)
        good = r.passed and r.tm_steps >= 50 and all(p.match for p in r.points)
        ok &= good
        lines.append(f"{name} {r.tm_steps} steps {'ok' if good else r.message}")
    # U15,2 on every input of length 2..6 from every head position
    runs = failed = longest = 0
    for n in range(2, 7):
        for tape in itertools.product("01", repeat=n):
            for i0 in range(1, n + 1):
                r = verify_equivalence(u15, tape, i0, 100, compiled)
                runs += 1
                failed += not r.passed
                longest = max(longest, r.tm_steps)
    ok &= failed == 0 and longest >= 50
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    lines.append(f"U15,2 {runs} runs, {failed} failed, longest {longest} steps")
    report("correspondence gap laws", ok, "; ".join(lines) + f"; {elapsed:.1f}s")
    assert ok


def test_decode_lag_lockstep():
    cases = random_suite()
    mismatched = []
    for idx, (sysm, word) in enumerate(cases):
        dec = ext_decode(make_table_model(sysm), word, sysm.halt, 10_000, stride=1)
        lag = run_lag(sysm, word, 10_000, stride=1)
        same = (
            dec.reason == lag.reason.value
            and dec.iterations == lag.iterations
            and [(r.context, r.response) for r in dec.records] == [(r.ctx, r.out) for r in lag.records]
        )
        if not same:
            mismatched.append(idx)
    kinds = {classify(s)[1] for s, _ in cases}
    ok = not mismatched and kinds == {1, 2} and len(cases) == 100
    report("decode/Lag lockstep", ok, f"{len(cases)} random (2,1)/(2,2) systems, mismatches at {mismatched or 'none'}")
    assert ok


def test_length_preservation(u15, compiled):
    broken = []
    flat_cases = [(s, w) for s, w in random_suite() if classify(s)[2]]
    for idx, (sysm, word) in enumerate(flat_cases):
        trace = run_lag(sysm, word, 10_000, stride=1)
        if any(r.len != len(word) for r in trace.records):
            broken.append(f"random#{idx}")
    machines = [
        ("u15_2", u15, compiled, [("000111", 3), ("101001", 5), ("11", 1)]),
        ("zigzag", build_zigzag(), None, [("s0110e", 2)]),
        ("expander", build_expander(), None, [("01", 2)]),
        ("right-mover", build_right_walker(), None, [("11", 1)]),
    ]
    for name, tm, comp, inputs in machines:
        flat = (comp or compile_machine(tm)).without_family("L7")
        if not classify(flat)[2]:
            broken.append(f"{name} not (2,1)")
        for tape, i0 in inputs:
            start = initial_string(tm, tape, i0)
            trace = run_lag(flat, start, 20_000, stride=1)
            if any(r.len != len(start) for r in trace.records):
                broken.append(f"{name}:{tape}")
    ok = not broken
    report("(N,1) length preservation", ok, f"{len(flat_cases)} random (2,1) runs + 4 stripped compiled systems, "
                                           f"violations {broken or 'none'}")
    assert ok


def test_u15_2_fidelity(u15, compiled):
    cells = reference_cells()
    wrong = []
    for (q, sym), entry in cells.items():
        if entry == "halt":
            if (q, sym) not in u15.halting or (q, sym) in u15.transitions:
                wrong.append((q, sym))
            continue
        write, move, nxt = entry.split(",")
        if u15.transitions.get((q, sym)) != Transition(write, nxt, RIGHT if move == "+" else -RIGHT):
            wrong.append((q, sym))
    table_ok = not wrong and len(u15.transitions) == 29 and len(u15.halting) == 1
    n, k, _ = classify(compiled.sys)
    restricted = (n, k) == (2, 2) and all(
        (len(rhs) == 2) == (compiled.origin[lhs].family == "L7") for lhs, rhs in compiled.sys.rules.items()
    )
    census = compiled.census
    delta = compiled.census_delta()
    fams = ", ".join(f"{f}={census['families'][f]}" for f in FAMILY_NAMES)
    soft = " ".join(f"{key} {d['ours']} vs {d['reference']} ({d['delta']:+d})" for key, d in delta.items())
    ok = table_ok and restricted and set(delta) == set(REFERENCE_CENSUS)
    report(
        "U15,2 fidelity",
        ok,
        f"table {'30/30 cells' if table_ok else f'mismatches {wrong}'}; (N,K)=({n},{k}); "
        f"census (soft check) {soft}; families {fams}",
    )
    assert ok


def test_exhaustive_transcript(compiled):
    t0 = time.perf_counter()
    codec = build_codec(compiled.sys)
    records = oracle_transcript(compiled.sys, codec)
    clean = verify_transcript(compiled.sys, codec, records)
    victim = 1234
    rec = records[victim]
    flipped = list(rec.response)
    flipped[0] = "Z" if flipped[0] != "Z" else "Y"
    corrupted = list(records)
    corrupted[victim] = type(rec)(rec.context, tuple(flipped))
    dirty = verify_transcript(compiled.sys, codec, corrupted)
    elapsed = time.perf_counter() - t0
    named = codec.decode_tokens(rec.context)
    ok = (
        clean.passed == len(compiled.sys) and clean.failed == 0 and clean.coverage == 1.0
        and dirty.failed == 1 and dirty.mismatches[0]["record"] == victim
        and dirty.mismatches[0]["rule"] == " ".join(map(str, named))
        and elapsed < 10
    )
    report(
        "exhaustive rule verification",
        ok,
        f"{clean.passed}/{len(compiled.sys)} rules, coverage {clean.coverage:.0%}; "
        f"corruption -> {dirty.failed} failure at '{dirty.mismatches[0]['rule'] if dirty.mismatches else '-'}'; "
        f"{elapsed:.2f}s",
    )
    assert ok


def test_codec_and_prompt_pack(compiled):
    codec = build_codec(compiled.sys)
    alphabet = compiled.sys.alphabet
    round_trip = all(codec.decode(*codec.encode(s)) == s for s in alphabet)
    distinct = len({codec.encode(s) for s in alphabet}) == len(alphabet)
    first = emit_prompt_pack(compiled.sys, codec, preamble="Apply one rule per step.").render()
    second = emit_prompt_pack(compile_machine(build_u15_2()).sys, build_codec(compiled.sys),
                              preamble="Apply one rule per step.").render()
    identical = first.encode() == second.encode()
    rebuilt = parse_rule_lines(first, codec) == dict(compiled.sys.rules)
    ok = round_trip and distinct and identical and rebuilt
    report(
        "codec and prompt pack",
        ok,
        f"{len(alphabet)} symbols round-trip={round_trip} distinct={distinct}; "
        f"pack byte-identical={identical}; rule map rebuilt={rebuilt}",
    )
    assert ok
