"""Turing machines and their finite-memory simulation.

The tape is held as a growable array terminated by a single delimiter
``#``.  Whenever the head steps onto the delimiter a fresh blank is inserted
in front of it, so an unbounded tape is simulated with finite storage.  This
simulator is the ground truth that compiled Lag systems are checked against.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

DELIMITER = "#"
LEFT, RIGHT = -1, +1

# Characters reserved by the Lag encoding (blank slot marker and delimiter).
RESERVED = frozenset({"_", DELIMITER, "|"})


class MachineError(ValueError):
    """Malformed machine definition or invalid simulator input."""


class AlphabetError(MachineError):
    pass


class BoundsError(MachineError):
    pass


class LeftEdgeError(RuntimeError):
    """The head tried to move left of cell 1."""


class Outcome(enum.Enum):
    CONTINUE = "continue"
    HALTED = "halted"
    STUCK = "stuck"


class HaltReason(str, enum.Enum):
    HALTED = "halted"
    STUCK = "stuck"
    LEFT_EDGE = "leftEdge"
    BUDGET = "budget"


@dataclass(frozen=True)
class Transition:
    write: str
    next: str
    move: int


@dataclass(frozen=True)
class TuringMachine:
    """A single-tape machine ``(Q, Gamma, b, q0, H, f)``.

    ``states`` and ``alphabet`` keep declaration order, which downstream code
    uses as the canonical symbol order.
    """

    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    blank: str
    start: str
    halting: frozenset[tuple[str, str]]
    transitions: Mapping[tuple[str, str], Transition]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise MachineError("duplicate state")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise MachineError("duplicate tape symbol")
        for atom in (*self.states, *self.alphabet):
            if not atom or atom in RESERVED:
                raise MachineError(f"reserved or empty identifier {atom!r}")
        if self.blank not in self.alphabet:
            raise AlphabetError(f"blank {self.blank!r} not in alphabet")
        if self.start not in self.states:
            raise MachineError(f"start state {self.start!r} not declared")
        states, symbols = set(self.states), set(self.alphabet)
        for q, g in (*self.halting, *self.transitions):
            if q not in states or g not in symbols:
                raise MachineError(f"pair ({q}, {g}) outside Q x Gamma")
        for (q, g), tr in self.transitions.items():
            if tr.write not in symbols or tr.next not in states:
                raise MachineError(f"transition ({q}, {g}) -> {tr} outside Q x Gamma")
            if tr.move not in (LEFT, RIGHT):
                raise MachineError(f"transition ({q}, {g}) has move {tr.move}")
        overlap = set(self.halting) & set(self.transitions)
        if overlap:
            raise MachineError(f"pairs both halting and transitioning: {sorted(overlap)}")

    @classmethod
    def from_table(
        cls,
        states: Iterable[str],
        alphabet: Iterable[str],
        blank: str,
        start: str,
        halting: Iterable[tuple[str, str]],
        table: Iterable[tuple[str, str, str, int, str]],
        name: str = "",
    ) -> "TuringMachine":
        """Build from ``(state, read, write, move, next)`` rows."""
        transitions: dict[tuple[str, str], Transition] = {}
        for q, g, w, d, q2 in table:
            if (q, g) in transitions:
                raise MachineError(f"duplicate transition for ({q}, {g})")
            transitions[(q, g)] = Transition(w, q2, d)
        return cls(
            tuple(states),
            tuple(alphabet),
            blank,
            start,
            frozenset(tuple(p) for p in halting),
            transitions,
            name,
        )

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "blank": self.blank,
            "start": self.start,
            "halting": [list(p) for p in sorted(self.halting, key=self.pair_key)],
            "transitions": [
                {"state": q, "read": g, "write": tr.write, "move": tr.move, "next": tr.next}
                for (q, g), tr in sorted(self.transitions.items(), key=lambda kv: self.pair_key(kv[0]))
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping, name: str = "") -> "TuringMachine":
        try:
            return cls.from_table(
                obj["states"],
                obj["alphabet"],
                obj["blank"],
                obj["start"],
                [tuple(p) for p in obj.get("halting", [])],
                [(t["state"], t["read"], t["write"], int(t["move"]), t["next"]) for t in obj["transitions"]],
                name=name,
            )
        except (KeyError, TypeError) as exc:
            raise MachineError(f"bad machine definition: {exc}") from exc

    @classmethod
    def load(cls, path) -> "TuringMachine":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh), name=str(path))

    def pair_key(self, pair: tuple[str, str]) -> tuple[int, int]:
        q, g = pair
        return self.states.index(q), self.alphabet.index(g)

    @property
    def left_transitions(self) -> list[tuple[tuple[str, str], Transition]]:
        return [(k, t) for k, t in self.transitions.items() if t.move == LEFT]

    @property
    def right_transitions(self) -> list[tuple[tuple[str, str], Transition]]:
        return [(k, t) for k, t in self.transitions.items() if t.move == RIGHT]


@dataclass
class TapeState:
    """Mutable simulator state; ``head`` is 1-based."""

    memory: list[str]
    head: int
    state: str
    steps: int = 0

    @property
    def length(self) -> int:
        return len(self.memory)

    @property
    def tape(self) -> str:
        return "".join(self.memory)

    def snapshot(self) -> tuple[tuple[str, ...], int, str]:
        return tuple(self.memory), self.head, self.state


@dataclass(frozen=True)
class StepRecord:
    k: int
    q: str
    i: int
    write: str
    len: int
    move: int

    def to_json(self) -> dict:
        return {"k": self.k, "q": self.q, "i": self.i, "write": self.write, "len": self.len}


@dataclass
class TmTrace:
    final: TapeState
    reason: HaltReason
    records: list[StepRecord]
    snapshots: list[tuple[tuple[str, ...], int, str]] | None = None

    @property
    def steps(self) -> int:
        return self.final.steps


def tm_init(tm: TuringMachine, tape: Sequence[str], i0: int = 1) -> TapeState:
    tape = list(tape)
    if not tape:
        raise BoundsError("input must contain at least one symbol")
    for g in tape:
        if g not in tm.alphabet:
            raise AlphabetError(f"input symbol {g!r} not in alphabet {tm.alphabet}")
    if not 0 < i0 <= len(tape):
        raise BoundsError(f"i0={i0} outside 1..{len(tape)}")
    return TapeState(tape + [DELIMITER], i0, tm.start)


def tm_step(tm: TuringMachine, st: TapeState) -> Outcome:
    """Advance ``st`` by one compute cycle in place.

    Raises :class:`LeftEdgeError` when the head would leave cell 1; the state
    is left untouched in that case.
    """
    symbol = st.memory[st.head - 1]
    key = (st.state, symbol)
    if key in tm.halting:
        return Outcome.HALTED
    tr = tm.transitions.get(key)
    if tr is None:
        return Outcome.STUCK
    new_head = st.head + tr.move
    if new_head < 1:
        raise LeftEdgeError(f"step {st.steps}: head would move left of cell 1 from ({st.state}, {symbol})")
    st.memory[st.head - 1] = tr.write
    st.state = tr.next
    st.head = new_head
    if st.memory[new_head - 1] == DELIMITER:
        st.memory.insert(new_head - 1, tm.blank)
    st.steps += 1
    return Outcome.CONTINUE


def run_tm(
    tm: TuringMachine,
    tape: Sequence[str],
    i0: int = 1,
    max_steps: int = 100_000,
    stride: int = 1,
    keep_snapshots: bool = False,
) -> TmTrace:
    """Run until halting, getting stuck, falling off the left edge or exhausting ``max_steps``.

    Per-step records are kept every ``stride`` steps (``stride=0`` disables
    them).  With ``keep_snapshots`` the full ``(memory, head, state)`` before
    every step and after the last one is retained as well.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    st = tm_init(tm, tape, i0)
    records: list[StepRecord] = []
    snaps = [st.snapshot()] if keep_snapshots else None
    reason = HaltReason.BUDGET
    while st.steps < max_steps:
        k, q, i = st.steps, st.state, st.head
        try:
            outcome = tm_step(tm, st)
        except LeftEdgeError:
            reason = HaltReason.LEFT_EDGE
            break
        if outcome is Outcome.HALTED:
            reason = HaltReason.HALTED
            break
        if outcome is Outcome.STUCK:
            reason = HaltReason.STUCK
            break
        if stride and k % stride == 0:
            records.append(StepRecord(k, q, i, st.memory[i - 1], st.length, st.head - i))
        if snaps is not None:
            snaps.append(st.snapshot())
    return TmTrace(st, reason, records, snaps)


U15_2_TABLE = """\
    A     B     C     D     E     F     G     H     I     J     K     L     M     N     O
0 0,+,B 1,+,C 0,-,G 0,-,F 1,+,A 1,-,D 0,-,H 1,-,I 0,+,A 1,-,K 0,+,L 0,+,M 0,-,B 0,-,C 0,+,N
1 1,+,A 1,+,A 0,-,E 1,-,E 1,-,D 1,-,D 1,-,G 1,-,G 1,-,J halt  1,+,N 1,+,L 1,+,L 0,+,O 1,+,N
"""


def parse_cell_table(text: str) -> tuple[list[str], list[tuple[str, str, str, int, str]], list[tuple[str, str]]]:
    """Parse a grid of ``write,move,next`` cells (rows: read symbol, columns: state)."""
    lines = [ln.split() for ln in text.strip().splitlines()]
    states = lines[0]
    rows, halting = [], []
    for row in lines[1:]:
        symbol, cells = row[0], row[1:]
        if len(cells) != len(states):
            raise MachineError(f"row {symbol!r} has {len(cells)} cells for {len(states)} states")
        for q, cell in zip(states, cells):
            if cell == "halt":
                halting.append((q, symbol))
                continue
            w, d, q2 = cell.split(",")
            rows.append((q, symbol, w, {"+": RIGHT, "-": LEFT}[d], q2))
    return states, rows, halting


def build_u15_2() -> TuringMachine:
    """The 15-state, 2-symbol universal machine (blank 0, start A, halt on (J, 1))."""
    states, rows, halting = parse_cell_table(U15_2_TABLE)
    return TuringMachine.from_table(states, ("0", "1"), "0", "A", halting, rows, name="u15_2")
