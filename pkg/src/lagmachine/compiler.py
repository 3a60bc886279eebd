"""Reduction of a Turing machine to a restricted (2,2)-Lag system.

Every Lag symbol is a triple ``(memory symbol, state or blank, control tag)``.
At a *correspondence point* the Lag string spells the tape ``m_1 ... m_{n-1} #``
with the current state on the head cell and every control tag blank.  One
machine step then costs

* ``2n`` iterations for a left move,
* ``n(n-1)^2 + 3n`` for a right move that stays inside the tape,
* ``n(n-1)^2 + 4n`` for a right move onto ``#`` (the string grows by one),

where ``n`` is the string length when the step starts.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence

from lagmachine.control import RRIGHT_PATTERNS, TAG_ORDER, ControlTag
from lagmachine.lag import LagSystem, run_lag
from lagmachine.lag import from_json as lag_from_json
from lagmachine.lag import to_json as lag_to_json
from lagmachine.machine import (
    DELIMITER,
    LEFT,
    BoundsError,
    AlphabetError,
    HaltReason,
    TuringMachine,
    run_tm,
)

BLANK = "_"
B = ControlTag.BLANK
FAMILY_NAMES = ("L1", "L2", "L3", "L4", "L5", "L6", "L7")
REFERENCE_CENSUS = {"rules": 2027, "symbols": 262, "pairRules": 16}


class CompilationError(ValueError):
    """Two generated rules share a left-hand side but disagree on the output."""


class Triple(NamedTuple):
    mem: str
    state: str
    ctrl: ControlTag

    def __str__(self) -> str:
        return f"{self.mem}|{self.state}|{self.ctrl.value}"

    @classmethod
    def parse(cls, text: str) -> "Triple":
        mem, state, ctrl = text.split("|")
        return cls(mem, state, ControlTag(ctrl))


def cell(mem: str, state: str = BLANK, ctrl: ControlTag = B) -> Triple:
    return Triple(mem, state, ctrl)


END = cell(DELIMITER)


@dataclass(frozen=True)
class RuleOrigin:
    family: str
    source: tuple[str, str] | None = None


@dataclass
class CompiledSystem:
    sys: LagSystem
    source: TuringMachine
    origin: dict[tuple, RuleOrigin]
    literal: bool = False

    @property
    def census(self) -> dict:
        families = {name: 0 for name in FAMILY_NAMES}
        for org in self.origin.values():
            families[org.family] += 1
        return {
            "rules": len(self.sys.rules),
            "symbols": len(self.sys.alphabet),
            "pairRules": sum(1 for rhs in self.sys.rules.values() if len(rhs) == 2),
            "families": families,
        }

    def census_delta(self) -> dict:
        """Our census next to the reference numbers."""
        ours = self.census
        return {key: {"ours": ours[key], "reference": ref, "delta": ours[key] - ref} for key, ref in REFERENCE_CENSUS.items()}

    def ordered_rules(self) -> list[tuple[tuple, tuple]]:
        rank = {name: i for i, name in enumerate(FAMILY_NAMES)}
        return sorted(
            self.sys.rules.items(),
            key=lambda kv: (rank[self.origin[kv[0]].family], self.sys.word_key(kv[0])),
        )

    def without_family(self, family: str) -> LagSystem:
        """The rule set with one family removed (e.g. ``L7`` for the (2,1) restriction)."""
        kept = {lhs: rhs for lhs, rhs in self.sys.rules.items() if self.origin[lhs].family != family}
        max_out = max((len(r) for r in kept.values()), default=1)
        return LagSystem(2, max_out, kept, frozenset(), self.sys.sort_key)

    def to_json(self) -> dict:
        obj = lag_to_json(self.sys, str, self.ordered_rules())
        obj["census"] = self.census
        obj["families"] = [self.origin[lhs].family for lhs, _ in self.ordered_rules()]
        return obj

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def triple_sort_key(tm: TuringMachine):
    mem = {g: i for i, g in enumerate((*tm.alphabet, DELIMITER))}
    state = {q: i for i, q in enumerate((BLANK, *tm.states))}

    def key(t: Triple):
        return mem[t.mem], state[t.state], TAG_ORDER[t.ctrl]

    return key


def load_compiled_json(obj) -> LagSystem:
    """Load a Lag system file whose symbols are ``mem|state|ctrl`` triples."""
    return lag_from_json(obj, Triple.parse)


def _slot(g: str, q: str, tag: ControlTag) -> Triple:
    # tag-blank cells carry no state in the right-move rule families
    return cell(g) if tag is B else cell(g, q, tag)


def compile_machine(tm: TuringMachine, literal: bool = False) -> CompiledSystem:
    """Emit the rule families L1..L7 for ``tm``.

    ``literal=True`` restricts the right neighbour of the first left-move rule
    to tape symbols exactly as written in the reduction; the default also
    admits ``#`` there, without which a left move from the last tape cell has
    no matching rule.
    """
    gamma = list(tm.alphabet)
    gamma_d = gamma + [DELIMITER]
    rules: dict[tuple, tuple] = {}
    origin: dict[tuple, RuleOrigin] = {}

    def emit(family, lhs, rhs, source=None):
        lhs, rhs = tuple(lhs), tuple(rhs)
        old = rules.get(lhs)
        if old is not None:
            if old != rhs:
                raise CompilationError(
                    f"{family} rule {' '.join(map(str, lhs))} -> {' '.join(map(str, rhs))} conflicts with "
                    f"{origin[lhs].family} output {' '.join(map(str, old))}"
                )
            return
        rules[lhs] = rhs
        origin[lhs] = RuleOrigin(family, source)

    for g1 in gamma_d:
        for g2 in gamma_d:
            emit("L1", (cell(g1), cell(g2)), (cell(g1),))
    for g1 in gamma_d:
        for g2 in gamma_d:
            for q in tm.states:
                emit("L2", (cell(g1), cell(g2, q)), (cell(g1),))

    for (q, g), tr in sorted(tm.transitions.items(), key=lambda kv: tm.pair_key(kv[0])):
        src = (q, g)
        g_new, q_new = tr.write, tr.next
        if tr.move == LEFT:
            moved = cell(g_new, q_new, ControlTag.L)
            for g1 in gamma if literal else gamma_d:
                emit("L3", (cell(g, q), cell(g1)), (moved,), src)
            for g1 in gamma_d:
                emit("L3", (cell(g1), moved), (cell(g1, q_new),), src)
            for g1 in gamma_d:
                emit("L3", (moved, cell(g1)), (cell(g_new),), src)
            continue
        for g1 in gamma_d:
            emit("L4", (cell(g, q), cell(g1)), (cell(g_new, q_new, ControlTag.R),), src)
        for a, b, c in RRIGHT_PATTERNS:
            if a is B and b is B:
                continue  # the all-blank pattern is L1
            for g1 in gamma_d:
                for g2 in gamma_d:
                    emit("L5", (_slot(g1, q_new, a), _slot(g2, q_new, b)), (_slot(g1, q_new, c),), src)
        for g1 in gamma_d:
            for g2 in gamma_d:
                emit("L6", (cell(g1, q_new, ControlTag.RR), cell(g2)), (cell(g1, q_new),), src)
        for g1 in gamma:
            emit("L7", (cell(DELIMITER, q_new), cell(g1)), (cell(tm.blank, q_new), END), src)

    max_out = max(len(r) for r in rules.values())
    sys = LagSystem(2, max_out, rules, frozenset(), triple_sort_key(tm))
    return CompiledSystem(sys, tm, origin, literal)


def pad_input(tm: TuringMachine, tape: Sequence[str]) -> list[str]:
    tape = list(tape)
    return tape + [tm.blank] * (2 - len(tape)) if len(tape) < 2 else tape


def initial_string(tm: TuringMachine, tape: Sequence[str], i0: int = 1) -> tuple[Triple, ...]:
    """The Lag string encoding ``tape`` with the head on cell ``i0``.

    Inputs shorter than two cells are padded with blanks.
    """
    tape = pad_input(tm, tape)
    if not 0 < i0 <= len(tape):
        raise BoundsError(f"i0={i0} outside 1..{len(tape)}")
    for g in tape:
        if g not in tm.alphabet:
            raise AlphabetError(f"input symbol {g!r} not in alphabet {tm.alphabet}")
    word = [cell(g, tm.start) if i == i0 else cell(g) for i, g in enumerate(tape, start=1)]
    return tuple(word) + (END,)


@dataclass(frozen=True)
class TapeSnapshot:
    memory: tuple[str, ...]
    head: int
    state: str

    @property
    def tape(self) -> str:
        return "".join(self.memory)

    def to_json(self) -> dict:
        return {"memory": self.tape, "head": self.head, "state": self.state}


def decode_snapshot(word: Sequence[Triple], rotate: bool = True) -> TapeSnapshot | None:
    """Read the tape back out of a Lag string at a correspondence point.

    Returns ``None`` unless exactly one delimiter is present, every control
    tag is blank and exactly one tape cell (not the delimiter) carries a
    state.  With ``rotate=False`` the delimiter must already be last.
    """
    word = list(word)
    ends = [i for i, t in enumerate(word) if t.mem == DELIMITER]
    if len(ends) != 1:
        return None
    if any(t.ctrl is not B for t in word):
        return None
    e = ends[0]
    if e != len(word) - 1:
        if not rotate:
            return None
        word = word[e + 1 :] + word[: e + 1]
    stateful = [i for i, t in enumerate(word) if t.state != BLANK]
    if len(stateful) != 1 or stateful[0] == len(word) - 1:
        return None
    i = stateful[0]
    return TapeSnapshot(tuple(t.mem for t in word), i + 1, word[i].state)


def step_gap(head: int, n: int, move: int) -> tuple[str, int]:
    """Case name and Lag iteration count for one machine step from length ``n``."""
    if move == LEFT:
        return "left", 2 * n
    if head < n - 1:
        return "right", n * (n - 1) ** 2 + 3 * n
    return "expand", n * (n - 1) ** 2 + 4 * n


@dataclass
class PointRecord:
    k: int
    iteration: int
    n: int
    case: str | None
    gap: int | None
    expected_gap: int | None
    snapshot: dict
    match: bool

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class EquivalenceReport:
    passed: bool
    tm_steps: int
    oracle_reason: str
    lag_iterations: int
    lag_reason: str
    points: list[PointRecord] = field(default_factory=list)
    first_divergence: int | None = None
    message: str = ""
    pair_applications: int = 0
    max_length: int = 0

    def to_json(self) -> dict:
        obj = asdict(self)
        obj["points"] = [p.to_json() for p in self.points]
        return obj


def verify_equivalence(
    tm: TuringMachine,
    tape: Sequence[str],
    i0: int = 1,
    tm_steps: int = 50,
    compiled: CompiledSystem | LagSystem | None = None,
) -> EquivalenceReport:
    """Run the machine and its compiled Lag system side by side.

    Every correspondence point of the Lag run must decode to the machine's
    configuration after the same number of steps, and consecutive points must
    be exactly the closed-form number of iterations apart.  When the machine
    halts (or gets stuck) the Lag system must stop on a missing rule before
    completing another pass.
    """
    if compiled is None:
        compiled = compile_machine(tm)
    lag_sys = compiled.sys if isinstance(compiled, CompiledSystem) else compiled
    padded = pad_input(tm, tape)
    start = initial_string(tm, padded, i0)
    oracle = run_tm(tm, padded, i0, tm_steps, keep_snapshots=True)
    snaps = oracle.snapshots
    moves = [r.move for r in oracle.records]
    K = oracle.steps

    def expected(k):
        mem, head, _ = snaps[k]
        return step_gap(head, len(mem), moves[k])

    points: list[PointRecord] = [
        PointRecord(0, 0, len(start), None, None, None, decode_snapshot(start, False).to_json(), True)
    ]
    state = {"fail": None, "pairs": 0, "max_len": len(start), "stop_at": None}
    first = decode_snapshot(start, False)
    if (first.memory, first.head, first.state) != snaps[0]:
        state["fail"] = (0, "initial string does not encode the initial configuration")

    def observe(st, y):
        s = st.string
        if len(y) == 2:
            state["pairs"] += 1
        ln = len(s)
        if ln > state["max_len"]:
            state["max_len"] = ln
        it = st.cursor
        if state["stop_at"] is not None:
            return it >= state["stop_at"]
        k = len(points)
        last = points[-1]
        case, gap = expected(k - 1)
        if s[-1] == END:
            snap = decode_snapshot(s, rotate=False)
            if snap is not None:
                got = (snap.memory, snap.head, snap.state)
                ok = got == snaps[k] and it - last.iteration == gap
                points.append(PointRecord(k, it, ln, case, it - last.iteration, gap, snap.to_json(), ok))
                if not ok:
                    what = "configuration" if got != snaps[k] else "gap"
                    state["fail"] = (k, f"{what} mismatch at step {k}")
                    return True
                if k == K:
                    # one more pass lets a halted machine's system run dry
                    state["stop_at"] = it + ln
                    return K == tm_steps and oracle.reason is HaltReason.BUDGET
                return None
        if it - last.iteration > gap:
            state["fail"] = (k, f"no correspondence point within {gap} iterations of step {k - 1}")
            return True
        return None

    trace = None
    if state["fail"] is None:
        if K == 0:
            state["stop_at"] = len(start)
        trace = run_lag(lag_sys, start, max_iters=10**9, observer=observe)
    fail = state["fail"]
    lag_reason = trace.reason.value if trace else "notRun"
    if fail is None and len(points) < K + 1:
        fail = (len(points), f"Lag system stopped ({lag_reason}) after {trace.iterations} iterations, "
                             f"before step {len(points)}")
    if fail is None and oracle.reason in (HaltReason.HALTED, HaltReason.STUCK) and lag_reason != "noMatch":
        fail = (K, f"machine {oracle.reason.value} but the Lag system kept running")
    report = EquivalenceReport(
        passed=fail is None,
        tm_steps=K,
        oracle_reason=oracle.reason.value,
        lag_iterations=trace.iterations if trace else 0,
        lag_reason=lag_reason,
        points=points,
        first_divergence=None if fail is None else fail[0],
        message="ok" if fail is None else fail[1],
        pair_applications=state["pairs"],
        max_length=state["max_len"],
    )
    return report
