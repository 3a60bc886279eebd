"""Extended autoregressive decoding, token-pair codec, prompt packs, transcripts.

A deterministic model maps a context of ``N`` symbols to a response of one or
more symbols, or to nothing at all (the implicit halt).  Decoding keeps the
whole sequence, slides the context one position per iteration and appends
each response to the end.  A rule table turned into a model decodes in
lockstep with the Lag interpreter on the same table.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from lagmachine.lag import LagSystem

UPPER = string.ascii_uppercase
LOWER = string.ascii_lowercase
CODEC_CAPACITY = len(UPPER) * len(LOWER)


class DecodingError(ValueError):
    pass


class InputTooShortError(DecodingError):
    pass


class MalformedResponseError(DecodingError):
    pass


class CodecError(DecodingError):
    pass


class TranscriptDecodeError(DecodingError):
    def __init__(self, index: int, detail: str):
        super().__init__(f"transcript record {index}: {detail}")
        self.index = index


class DeterministicModel:
    """Zero-temperature model: the same context always yields the same response.

    Subclasses implement :meth:`respond`, returning a tuple of symbols or
    ``None`` for the implicit halt.
    """

    def __init__(self, context_len: int, max_out: int = 2):
        self.context_len = context_len
        self.max_out = max_out

    def respond(self, context: tuple) -> tuple | None:
        raise NotImplementedError

    def __call__(self, context: tuple) -> tuple | None:
        out = self.respond(tuple(context))
        if out is not None and not 1 <= len(out) <= self.max_out:
            raise MalformedResponseError(f"response of length {len(out)} outside 1..{self.max_out}")
        return out


class TableModel(DeterministicModel):
    def __init__(self, table: Mapping[tuple, tuple], context_len: int, max_out: int):
        super().__init__(context_len, max_out)
        self.table = table

    def respond(self, context):
        return self.table.get(context)


class FunctionModel(DeterministicModel):
    def __init__(self, fn: Callable[[tuple], tuple | None], context_len: int, max_out: int = 2):
        super().__init__(context_len, max_out)
        self.fn = fn

    def respond(self, context):
        return self.fn(context)


def make_table_model(sys: LagSystem) -> TableModel:
    return TableModel(sys.rules, sys.context_len, sys.max_out)


@dataclass(frozen=True)
class DecodeRecord:
    k: int
    context: tuple
    response: tuple
    ell: int


@dataclass
class DecodeTrace:
    sequence: list
    records: list[DecodeRecord]
    reason: str
    iterations: int
    appended: int

    def tail(self) -> tuple:
        """The live window: what a Lag system would hold at the same point."""
        return tuple(self.sequence[self.iterations :])


def ext_decode(
    model: DeterministicModel,
    word: Sequence,
    halt: Iterable = (),
    max_iters: int = 10_000,
    stride: int | None = 1,
) -> DecodeTrace:
    """Decode until no response, a halt symbol, or ``max_iters`` iterations.

    Reasons mirror the Lag interpreter: ``noMatch`` (implicit halt, or the
    window ran past the end of the sequence), ``haltSymbol`` and ``budget``.
    """
    n = model.context_len
    seq = list(word)
    if len(seq) < n:
        raise InputTooShortError(f"input of length {len(seq)} shorter than context {n}")
    halt = frozenset(halt)
    records: list[DecodeRecord] = []
    ell = 0
    reason = "budget"
    k = 0
    while k < max_iters:
        if k + n > len(seq):
            reason = "noMatch"
            break
        ctx = tuple(seq[k : k + n])
        y = model(ctx)
        if y is None:
            reason = "noMatch"
            break
        seq.extend(y)
        ell += len(y)
        if stride and k % stride == 0:
            records.append(DecodeRecord(k, ctx, tuple(y), ell))
        k += 1
        if halt and not halt.isdisjoint(y):
            reason = "haltSymbol"
            break
    return DecodeTrace(seq, records, reason, k, ell)


# -- token-pair codec ----------------------------------------------------------


@dataclass(frozen=True)
class TokenPairCodec:
    forward: Mapping[Any, tuple[str, str]]
    backward: Mapping[tuple[str, str], Any]

    def encode(self, sym) -> tuple[str, str]:
        try:
            return self.forward[sym]
        except KeyError:
            raise CodecError(f"symbol {sym} not covered by the codec") from None

    def decode(self, t1: str, t2: str):
        try:
            return self.backward[(t1, t2)]
        except KeyError:
            raise CodecError(f"token pair {t1} {t2} not in the codec") from None

    def encode_word(self, word: Iterable) -> list[str]:
        return [tok for sym in word for tok in self.encode(sym)]

    def decode_tokens(self, tokens: Sequence[str]) -> tuple:
        if len(tokens) % 2:
            raise CodecError(f"odd number of tokens ({len(tokens)})")
        return tuple(self.decode(tokens[i], tokens[i + 1]) for i in range(0, len(tokens), 2))

    def table(self, render: Callable[[Any], str] = str) -> list[dict]:
        return [{"symbol": render(s), "tokens": " ".join(t)} for s, t in self.forward.items()]


def pair_tokens(index: int) -> tuple[str, str]:
    return UPPER[index // 26], LOWER[index % 26]


def build_codec(sys: LagSystem | Sequence) -> TokenPairCodec:
    """Assign ``(UPPER[i // 26], lower[i % 26])`` to the i-th symbol in canonical order."""
    alphabet = sys.alphabet if isinstance(sys, LagSystem) else tuple(sys)
    if len(alphabet) > CODEC_CAPACITY:
        raise CodecError(f"alphabet of {len(alphabet)} symbols exceeds codec capacity {CODEC_CAPACITY}")
    forward = {sym: pair_tokens(i) for i, sym in enumerate(alphabet)}
    return TokenPairCodec(forward, {v: k for k, v in forward.items()})


# -- prompt packs ---------------------------------------------------------------


@dataclass
class PromptPack:
    preamble: str
    rule_lines: list[str]
    metadata: dict = field(default_factory=dict)
    repeat: int = 1

    def render(self) -> str:
        parts = []
        if self.preamble:
            parts.append(self.preamble.rstrip("\n") + "\n\n")
        body = "".join(line + "\n" for line in self.rule_lines)
        parts.append(body * self.repeat)
        return "".join(parts)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())


def rule_line(codec: TokenPairCodec, lhs: Sequence, rhs: Sequence) -> str:
    return " ".join(codec.encode_word(lhs)) + " -> " + " ".join(codec.encode_word(rhs))


def emit_prompt_pack(
    sys: LagSystem,
    codec: TokenPairCodec,
    preamble: str = "",
    repeat: int = 1,
    ordered: list[tuple[tuple, tuple]] | None = None,
    census: Mapping | None = None,
) -> PromptPack:
    """One ``T1 T2 T3 T4 -> U1 U2 [U3 U4]`` line per rule, in canonical order."""
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    ordered = sys.ordered_rules() if ordered is None else ordered
    lines = [rule_line(codec, lhs, rhs) for lhs, rhs in ordered]
    meta = {
        "census": dict(census) if census else {"rules": len(sys.rules), "symbols": len(sys.alphabet)},
        "codec": codec.table(),
    }
    return PromptPack(preamble, lines, meta, repeat)


def parse_rule_lines(text: str, codec: TokenPairCodec) -> dict[tuple, tuple]:
    """Recover the rule map from the rule lines of a rendered pack."""
    rules: dict[tuple, tuple] = {}
    for line in text.splitlines():
        if "->" not in line:
            continue
        lhs, rhs = line.split("->")
        key = codec.decode_tokens(lhs.split())
        out = codec.decode_tokens(rhs.split())
        if key in rules and rules[key] != out:
            raise CodecError(f"conflicting lines for context {lhs.strip()}")
        rules[key] = out
    return rules


# -- transcripts ------------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptRecord:
    context: tuple[str, ...]
    response: tuple[str, ...]

    def to_json(self) -> dict:
        return {"context": list(self.context), "response": list(self.response)}


def oracle_transcript(sys: LagSystem, codec: TokenPairCodec, model: DeterministicModel | None = None):
    """Query ``model`` (the rule table by default) on every rule context."""
    model = make_table_model(sys) if model is None else model
    records = []
    for lhs, _ in sys.ordered_rules():
        out = model(lhs)
        records.append(
            TranscriptRecord(tuple(codec.encode_word(lhs)), tuple(codec.encode_word(out)) if out else ())
        )
    return records


def write_transcript(records: Iterable[TranscriptRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json()) + "\n")


def read_transcript(path) -> list[TranscriptRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                records.append(TranscriptRecord(tuple(obj["context"]), tuple(obj["response"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise TranscriptDecodeError(i, f"malformed record: {exc}") from exc
    return records


@dataclass
class VerifyReport:
    passed: int
    failed: int
    total_rules: int
    exercised: int
    mismatches: list[dict]
    results: list[dict] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return self.exercised / self.total_rules if self.total_rules else 0.0

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "failed": self.failed,
            "coverage": self.coverage,
            "exercised": self.exercised,
            "totalRules": self.total_rules,
            "mismatches": self.mismatches,
            "results": self.results,
        }


def verify_transcript(
    sys: LagSystem,
    codec: TokenPairCodec,
    transcript: Sequence[TranscriptRecord],
    render: Callable[[Any], str] = str,
) -> VerifyReport:
    """Check each recorded response against the rule for its context."""
    passed = failed = 0
    mismatches = []
    results = []
    exercised = set()
    for i, rec in enumerate(transcript):
        if len(rec.context) != 2 * sys.context_len:
            raise TranscriptDecodeError(i, f"context has {len(rec.context)} tokens")
        try:
            ctx = codec.decode_tokens(rec.context)
        except CodecError as exc:
            raise TranscriptDecodeError(i, str(exc)) from exc
        want = sys.rules.get(ctx)
        rule = " ".join(map(render, ctx))
        try:
            got = codec.decode_tokens(rec.response) if rec.response else None
        except CodecError as exc:
            got, detail = None, str(exc)
        else:
            detail = ""
        if want is not None:
            exercised.add(ctx)
        ok = want is not None and got == want
        results.append({"record": i, "rule": rule, "ok": ok})
        if ok:
            passed += 1
            continue
        failed += 1
        mismatches.append(
            {
                "record": i,
                "rule": rule,
                "expected": None if want is None else " ".join(codec.encode_word(want)),
                "observed": " ".join(rec.response),
                **({"detail": detail} if detail else {}),
                **({"detail": "no rule for context"} if want is None else {}),
            }
        )
    return VerifyReport(passed, failed, len(sys.rules), len(exercised), mismatches, results)
