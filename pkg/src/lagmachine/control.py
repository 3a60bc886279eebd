"""Position control on a circular queue.

A (2,1) Lag system over pairs ``(data, tag)`` rotates its string like a
circular queue.  The rule sets below only rewrite the tag coordinate, which
lets a single control tag walk one step counterclockwise (``R_left``, n-1
iterations) or one step clockwise (``R_right``, n(n-1)^2 + n + 1 iterations).

Each rule set is described once as a table of tag patterns ``a b -> c`` and
materialised over every pair of data symbols.  :func:`ring_run` interprets
the pattern tables directly on a ring buffer and serves as the independent
reference for :func:`verify_rotation_laws`.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

from lagmachine.lag import LagSystem, run_lag


class ControlTag(str, enum.Enum):
    BLANK = "_"
    P = "p"
    L = "L"
    LL = "l"
    T = "t"
    W = "w"
    R = "R"
    D = "d"
    G = "g"
    Z = "z"
    V = "v"
    RR = "r"

    def __str__(self) -> str:
        return self.value


TAG_ORDER = {tag: i for i, tag in enumerate(ControlTag)}


def tag(ch: str) -> ControlTag:
    return ControlTag(ch)


def _patterns(text: str) -> tuple[tuple[ControlTag, ControlTag, ControlTag], ...]:
    out = []
    for item in text.split(","):
        ab, c = item.split("->")
        a, b = ab.split()
        out.append((tag(a), tag(b), tag(c.strip())))
    return tuple(out)


RP_PATTERNS = _patterns("_ _ -> _, _ p -> p, p _ -> _")
RLEFT_PATTERNS = _patterns("_ _ -> _, _ L -> l, L _ -> _")
RT_EXTRA = _patterns("_ t -> p, _ w -> _, t _ -> w, w _ -> w, w p -> t, p w -> _")
RRIGHT_EXTRA = _patterns(
    "_ R -> d, _ d -> _, _ g -> z, _ z -> p, _ v -> v, _ r -> _, R _ -> t,"
    "w d -> v, w z -> w, p d -> _, d _ -> d, d t -> g, d p -> g, d v -> r,"
    "g _ -> _, g w -> _, z _ -> d, v _ -> _, v d -> _"
)
RT_PATTERNS = RP_PATTERNS + RT_EXTRA
RRIGHT_PATTERNS = RT_PATTERNS + RRIGHT_EXTRA

FAMILIES = {
    "rp": RP_PATTERNS,
    "rleft": RLEFT_PATTERNS,
    "rt": RT_PATTERNS,
    "rright": RRIGHT_PATTERNS,
}


class PairedSymbol(NamedTuple):
    data: str
    ctrl: ControlTag

    def __str__(self) -> str:
        return f"{self.data}|{self.ctrl.value}"


def paired(word: str | Sequence[str], tags: Sequence[ControlTag] | str) -> tuple[PairedSymbol, ...]:
    """Zip data symbols with tags; a string of tag characters is accepted."""
    if isinstance(tags, str):
        tags = [tag(c) for c in tags]
    if len(word) != len(tags):
        raise ValueError("data and tag sequences differ in length")
    return tuple(PairedSymbol(d, t) for d, t in zip(word, tags))


def materialise(patterns, base: Sequence[str]) -> LagSystem:
    """Instantiate tag patterns over every pair of data symbols."""
    base = tuple(base)
    if not base:
        raise ValueError("base alphabet must be non-empty")
    rank = {d: i for i, d in enumerate(base)}
    rules = (
        ((PairedSymbol(x, a), PairedSymbol(y, b)), (PairedSymbol(x, c),))
        for a, b, c in patterns
        for x in base
        for y in base
    )
    return LagSystem.from_rules(rules, 2, 1, sort_key=lambda s: (rank[s.data], TAG_ORDER[s.ctrl]))


def build_rp(base: Sequence[str]) -> LagSystem:
    return materialise(RP_PATTERNS, base)


def build_rleft(base: Sequence[str]) -> LagSystem:
    return materialise(RLEFT_PATTERNS, base)


def build_rt(base: Sequence[str]) -> LagSystem:
    return materialise(RT_PATTERNS, base)


def build_rright(base: Sequence[str]) -> LagSystem:
    return materialise(RRIGHT_PATTERNS, base)


def ring_run(patterns, word: Sequence[PairedSymbol], iters: int) -> Iterable[tuple[PairedSymbol, ...]]:
    """Yield the queue contents after each of ``iters`` iterations.

    The string is a fixed ring with a moving read position; the head pair
    takes its new tag from the pattern of itself and its successor.  Stops
    early when no pattern applies.
    """
    table = {(a, b): c for a, b, c in patterns}
    ring = list(word)
    n = len(ring)
    for k in range(iters):
        pos = k % n
        head, nxt = ring[pos], ring[(pos + 1) % n]
        c = table.get((head.ctrl, nxt.ctrl))
        if c is None:
            return
        ring[pos] = PairedSymbol(head.data, c)
        start = (pos + 1) % n
        yield tuple(ring[start:] + ring[:start])


# -- rotation laws -----------------------------------------------------------


def left_iterations(n: int) -> int:
    return n - 1


def cycle_iterations(n: int) -> int:
    return n * (n - 1)


def right_iterations(n: int) -> int:
    return n * (n - 1) ** 2 + n + 1


def rotate(word: Sequence, k: int) -> tuple:
    k %= len(word)
    return tuple(word[k:]) + tuple(word[:k])


def data_word(n: int, base: Sequence[str]) -> list[str]:
    """An aperiodic data word of length ``n`` (so every rotation is distinct)."""
    if len(base) == 1:
        return [base[0]] * n
    return [base[1]] + [base[0]] * (n - 1)


def tagged(data: Sequence[str], position: int, ctrl: ControlTag) -> tuple[PairedSymbol, ...]:
    """All-blank pairs except ``ctrl`` at 1-based ``position``."""
    return tuple(
        PairedSymbol(d, ctrl if i == position else ControlTag.BLANK) for i, d in enumerate(data, start=1)
    )


@dataclass
class LawRecord:
    n: int
    law: str
    expected_iterations: int
    passed: bool
    observed: str
    placement: int = 0
    first_divergence: int | None = None

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class LawReport:
    records: list[LawRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[LawRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "total": len(self.records),
            "failed": len(self.failures()),
            "records": [r.to_json() for r in self.records],
        }


@dataclass(frozen=True)
class Law:
    """One closed-form claim: start string, iteration count, expected string."""

    name: str
    family: str
    initial: tuple
    iterations: int
    expected: tuple
    # the expected string must not occur between ``period_from`` and
    # ``iterations`` (minimal period checks)
    minimal_period: bool = False
    period_from: int = 0


def laws_for(n: int, base: Sequence[str], placement: int | None = None) -> list[Law]:
    """The rotation laws for a ring of ``n`` pairs.

    The canonical initiating position is ``n - 1``.  A tag at any other
    position ``j`` in ``2..n`` is the canonical configuration observed
    ``j - (n - 1)`` iterations earlier or later, so the counts shift by that
    offset and the resulting strings are the canonical ones.
    """
    if n < 3:
        raise ValueError(f"rotation laws need n >= 3, got {n}")
    j = n - 1 if placement is None else placement
    if not 2 <= j <= n:
        raise ValueError(f"placement {j} outside 2..{n}")
    shift = j - (n - 1)
    s = data_word(n, base)
    B = ControlTag.BLANK

    def start(ctrl):
        return rotate(tagged(s, n - 1, ctrl), -shift)

    def ring(tags: dict[int, ControlTag], offset: int) -> tuple:
        return rotate(tuple(PairedSymbol(d, tags.get(i, B)) for i, d in enumerate(s, start=1)), offset)

    cyc = cycle_iterations(n)
    sq = (n - 1) ** 2
    aperiodic = len(base) > 1
    # a tag on the last pair reaches the canonical start after one iteration
    lead = max(shift, 0)

    def period(name, family, ctrl):
        return Law(name, family, start(ctrl), cyc + lead, tagged(s, n - 1, ctrl) if lead else start(ctrl),
                   minimal_period=aperiodic, period_from=lead)

    return [
        Law("left_move", "rleft", start(ControlTag.L), left_iterations(n) + shift,
            ring({n - 2: ControlTag.LL}, n - 1)),
        Law("rp_clockwise_pulse", "rp", start(ControlTag.P), sq + shift, ring({n: ControlTag.P}, 1)),
        period("rp_period", "rp", ControlTag.P),
        Law("rt_memory", "rt", start(ControlTag.T), sq + shift,
            ring({n - 1: ControlTag.W, n: ControlTag.P}, 1)),
        period("rt_period", "rt", ControlTag.T),
        Law("right_move", "rright", start(ControlTag.R), right_iterations(n) + shift,
            ring({n: ControlTag.RR}, 1)),
    ]


def check_law(law: Law, system: LagSystem, patterns=None) -> LawRecord:
    """Run ``system`` for the law's iteration count and compare.

    The interpreter trajectory is compared step by step against
    :func:`ring_run` on the pattern table; the first disagreement (or early
    halt) is recorded as ``first_divergence``.
    """
    patterns = FAMILIES[law.family] if patterns is None else patterns
    n = len(law.initial)
    ref = ring_run(patterns, law.initial, law.iterations)
    divergence: list[int] = []
    recurred: list[int] = []

    def observe(st, _y):
        k = st.cursor
        cur = tuple(st.string)
        expect = next(ref, None)
        if expect is None or cur != expect:
            divergence.append(k)
            return True
        if law.minimal_period and law.period_from < k < law.iterations and cur == law.expected:
            recurred.append(k)
        return None

    trace = run_lag(system, law.initial, max_iters=law.iterations, observer=observe)
    final = trace.final.word()
    done = trace.iterations
    if not divergence and done < law.iterations:
        divergence.append(done + 1)
    ok = not divergence and not recurred and final == law.expected
    if ok:
        observed = "match"
    elif divergence:
        observed = f"diverged from reference at iteration {divergence[0]} ({trace.reason.value} after {done})"
    elif recurred:
        observed = f"string recurred early at iteration {recurred[0]}"
    else:
        observed = "final string differs: " + " ".join(map(str, final))
    return LawRecord(
        n,
        law.name,
        law.iterations,
        ok,
        observed,
        first_divergence=divergence[0] if divergence else (recurred[0] if recurred else (None if ok else law.iterations)),
    )


def verify_rotation_laws(
    n_range: Iterable[int],
    base: Sequence[str] = ("0", "1"),
    systems: dict[str, LagSystem] | None = None,
    placements: bool = False,
) -> LawReport:
    """Check every rotation law for each ring size in ``n_range``.

    ``systems`` may override the built rule sets (keyed ``rp``, ``rleft``,
    ``rt``, ``rright``), e.g. to confirm that a mutated rule set is caught.
    With ``placements`` every initiating position 2..n is checked, not just
    the canonical one.
    """
    ns = list(n_range)
    bad = [n for n in ns if n < 3]
    if bad:
        raise ValueError(f"rotation laws need n >= 3, got {bad}")
    builders: dict[str, Callable[[Sequence[str]], LagSystem]] = {
        "rp": build_rp,
        "rleft": build_rleft,
        "rt": build_rt,
        "rright": build_rright,
    }
    built = {name: (systems or {}).get(name) or fn(base) for name, fn in builders.items()}
    report = LawReport()
    for n in ns:
        positions = range(2, n + 1) if placements else [n - 1]
        for j in positions:
            for law in laws_for(n, base, j):
                rec = check_law(law, built[law.family])
                rec.placement = j
                report.records.append(rec)
    return report
