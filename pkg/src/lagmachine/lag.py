"""Deterministic Lag systems.

A Lag system matches its rules against the first ``N`` symbols of a memory
string, appends the matched output to the end and deletes the first symbol.
The string is kept in a :class:`collections.deque` so the dequeue/enqueue pair
of every iteration is O(1); acceptance runs go to ~10^6 iterations.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from itertools import islice
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

Symbol = Hashable
Word = tuple


class LagError(ValueError):
    pass


class DuplicateRuleError(LagError):
    """A second rule was given for an existing left-hand side."""


class Outcome(enum.Enum):
    CONTINUE = "continue"
    HALT_NO_MATCH = "noMatch"
    HALT_SYMBOL = "haltSymbol"


class HaltReason(str, enum.Enum):
    NO_MATCH = "noMatch"
    HALT_SYMBOL = "haltSymbol"
    BUDGET = "budget"


def _natural_key(sym: Any) -> Any:
    return sym


@dataclass(frozen=True, eq=False)
class LagSystem:
    """Context length ``N``, output bound ``K``, a rule table and halt symbols.

    ``sort_key`` fixes the canonical symbol order (used by serialisation and
    the token-pair codec).  It defaults to the symbols' own ordering.
    """

    context_len: int
    max_out: int
    rules: Mapping[Word, Word]
    halt: frozenset = frozenset()
    sort_key: Callable[[Any], Any] = field(default=_natural_key, repr=False)

    def __post_init__(self):
        if self.context_len < 1 or self.max_out < 1:
            raise LagError("context length and output bound must be >= 1")
        for lhs, rhs in self.rules.items():
            if len(lhs) != self.context_len:
                raise LagError(f"rule {lhs} has context {len(lhs)} != {self.context_len}")
            if not 1 <= len(rhs) <= self.max_out:
                raise LagError(f"rule {lhs} -> {rhs}: output length {len(rhs)} outside 1..{self.max_out}")

    @classmethod
    def from_rules(
        cls,
        rules: Iterable[tuple[Sequence[Symbol], Sequence[Symbol]]],
        context_len: int = 2,
        max_out: int | None = None,
        halt: Iterable[Symbol] = (),
        sort_key: Callable[[Any], Any] = _natural_key,
    ) -> "LagSystem":
        table: dict[Word, Word] = {}
        for lhs, rhs in rules:
            lhs, rhs = tuple(lhs), tuple(rhs)
            if lhs in table:
                raise DuplicateRuleError(f"duplicate left-hand side {lhs}")
            table[lhs] = rhs
        if max_out is None:
            max_out = max((len(r) for r in table.values()), default=1)
        return cls(context_len, max_out, table, frozenset(halt), sort_key)

    def with_rule(self, lhs: Sequence[Symbol], rhs: Sequence[Symbol]) -> "LagSystem":
        lhs, rhs = tuple(lhs), tuple(rhs)
        if lhs in self.rules:
            raise DuplicateRuleError(f"duplicate left-hand side {lhs}")
        table = dict(self.rules)
        table[lhs] = rhs
        return LagSystem(self.context_len, max(self.max_out, len(rhs)), table, self.halt, self.sort_key)

    def replace_rules(self, rules: Mapping[Word, Word]) -> "LagSystem":
        return LagSystem(self.context_len, self.max_out, dict(rules), self.halt, self.sort_key)

    @property
    def alphabet(self) -> tuple:
        """Every symbol occurring in a rule or the halt set, in canonical order."""
        syms = set(self.halt)
        for lhs, rhs in self.rules.items():
            syms.update(lhs)
            syms.update(rhs)
        return tuple(sorted(syms, key=self.sort_key))

    def word_key(self, word: Word) -> tuple:
        return tuple(self.sort_key(s) for s in word)

    def ordered_rules(self) -> list[tuple[Word, Word]]:
        return sorted(self.rules.items(), key=lambda kv: self.word_key(kv[0]))

    def __len__(self) -> int:
        return len(self.rules)

    def __eq__(self, other):
        if not isinstance(other, LagSystem):
            return NotImplemented
        return (
            self.context_len == other.context_len
            and self.max_out == other.max_out
            and dict(self.rules) == dict(other.rules)
            and self.halt == other.halt
        )

    __hash__ = None


@dataclass
class LagState:
    """The working string plus the iteration and append counters."""

    string: deque
    cursor: int = 0
    appended: int = 0
    initial_len: int = 0

    @classmethod
    def start(cls, word: Iterable[Symbol]) -> "LagState":
        string = deque(word)
        return cls(string, 0, 0, len(string))

    def word(self) -> tuple:
        return tuple(self.string)


@dataclass(frozen=True)
class LagRecord:
    iter: int
    ctx: tuple
    out: tuple
    len: int

    def to_json(self, render: Callable[[Any], str] = str) -> dict:
        return {
            "iter": self.iter,
            "ctx": [render(s) for s in self.ctx],
            "out": [render(s) for s in self.out],
            "len": self.len,
        }


@dataclass
class LagTrace:
    final: LagState
    reason: HaltReason
    records: list[LagRecord]

    @property
    def iterations(self) -> int:
        return self.final.cursor


def lag_step(sys: LagSystem, st: LagState) -> tuple[Outcome, Word | None]:
    """One iteration in place; returns the outcome and the output appended (if any)."""
    n = sys.context_len
    s = st.string
    if len(s) < n:
        return Outcome.HALT_NO_MATCH, None
    ctx = (s[0], s[1]) if n == 2 else tuple(islice(s, n))
    y = sys.rules.get(ctx)
    if y is None:
        return Outcome.HALT_NO_MATCH, None
    s.popleft()
    s.extend(y)
    st.cursor += 1
    st.appended += len(y)
    if sys.halt and not sys.halt.isdisjoint(y):
        return Outcome.HALT_SYMBOL, y
    return Outcome.CONTINUE, y


def run_lag(
    sys: LagSystem,
    word: Iterable[Symbol],
    max_iters: int = 10_000_000,
    stride: int | None = None,
    observer: Callable[[LagState, Word], bool | None] | None = None,
) -> LagTrace:
    """Iterate :func:`lag_step` until a halt or ``max_iters`` iterations.

    ``stride`` keeps one record every ``stride`` iterations.  ``observer`` is
    called after every applied rule with the state and the output; returning
    ``True`` stops the run early (reported as a budget stop).
    """
    if max_iters < 0:
        raise ValueError("max_iters must be non-negative")
    st = LagState.start(word)
    records: list[LagRecord] = []
    rules = sys.rules
    halt = sys.halt
    n = sys.context_len
    s = st.string
    reason = HaltReason.BUDGET
    # Inlined lag_step: this loop is the hot path of every long run.
    while st.cursor < max_iters:
        if len(s) < n:
            reason = HaltReason.NO_MATCH
            break
        ctx = (s[0], s[1]) if n == 2 else tuple(islice(s, n))
        y = rules.get(ctx)
        if y is None:
            reason = HaltReason.NO_MATCH
            break
        s.popleft()
        s.extend(y)
        k = st.cursor
        st.cursor = k + 1
        st.appended += len(y)
        if stride and k % stride == 0:
            records.append(LagRecord(k, ctx, y, len(s)))
        if halt and not halt.isdisjoint(y):
            reason = HaltReason.HALT_SYMBOL
            break
        if observer is not None and observer(st, y):
            break
    return LagTrace(st, reason, records)


def classify(sys: LagSystem) -> tuple[int, int, bool]:
    """Return ``(N, K, length_preserving)``; an empty rule set counts as K = 1."""
    k = max((len(rhs) for rhs in sys.rules.values()), default=1)
    return sys.context_len, k, k == 1


# -- JSON ------------------------------------------------------------------


def to_json(
    sys: LagSystem,
    render: Callable[[Any], str] = str,
    ordered: list[tuple[Word, Word]] | None = None,
) -> dict:
    """Serialise with rules in canonical order and the canonical alphabet listed."""
    ordered = sys.ordered_rules() if ordered is None else ordered
    n, k, _ = classify(sys)
    return {
        "n": sys.context_len,
        "k": k,
        "halt": [render(s) for s in sorted(sys.halt, key=sys.sort_key)],
        "alphabet": [render(s) for s in sys.alphabet],
        "rules": [{"lhs": [render(s) for s in lhs], "rhs": [render(s) for s in rhs]} for lhs, rhs in ordered],
    }


def from_json(obj: Mapping, parse: Callable[[str], Any] = str) -> LagSystem:
    """Load a Lag system; an ``alphabet`` array, when present, fixes the symbol order."""
    try:
        rules = [([parse(s) for s in r["lhs"]], [parse(s) for s in r["rhs"]]) for r in obj["rules"]]
        n = int(obj["n"])
        k = int(obj.get("k") or max((len(r) for _, r in rules), default=1))
        halt = [parse(s) for s in obj.get("halt", [])]
    except (KeyError, TypeError) as exc:
        raise LagError(f"bad Lag system definition: {exc}") from exc
    sort_key: Callable[[Any], Any] = _natural_key
    if "alphabet" in obj:
        rank = {parse(s): i for i, s in enumerate(obj["alphabet"])}
        sort_key = lambda sym: (rank.get(sym, len(rank)), sym)  # noqa: E731
    return LagSystem.from_rules(rules, n, k, halt, sort_key)


def load(path, parse: Callable[[str], Any] = str) -> LagSystem:
    with open(path, encoding="utf-8") as fh:
        return from_json(json.load(fh), parse)


def dump(sys: LagSystem, path, render: Callable[[Any], str] = str, extra: Mapping | None = None) -> None:
    obj = to_json(sys, render)
    if extra:
        obj.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
