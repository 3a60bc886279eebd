import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmachine.compiler import initial_string
from lagmachine.decoding import (
    CODEC_CAPACITY,
    CodecError,
    FunctionModel,
    InputTooShortError,
    MalformedResponseError,
    TranscriptDecodeError,
    TokenPairCodec,
    TranscriptRecord,
    build_codec,
    emit_prompt_pack,
    ext_decode,
    make_table_model,
    oracle_transcript,
    parse_rule_lines,
    read_transcript,
    verify_transcript,
    write_transcript,
)
from lagmachine.lag import LagSystem, run_lag


def lockstep(sysm, word, iters):
    """Drive both executions and compare them context by context."""
    dec = ext_decode(make_table_model(sysm), word, sysm.halt, iters, stride=1)
    lag = run_lag(sysm, word, iters, stride=1)
    assert dec.reason == lag.reason.value
    assert dec.iterations == lag.iterations
    assert [(r.context, r.response) for r in dec.records] == [(r.ctx, r.out) for r in lag.records]
    assert dec.tail() == lag.final.word()
    assert dec.appended == lag.final.appended
    return dec


def test_rotation_lockstep():
    sysm = LagSystem.from_rules([("aa", "a")])
    dec = lockstep(sysm, "aaa", 20)
    assert dec.reason == "budget" and "".join(dec.sequence) == "a" * 23


def test_two_symbol_response_advances_window_once():
    model = FunctionModel(lambda ctx: ("x", "y") if ctx == ("a", "b") else None, 2)
    dec = ext_decode(model, "abc", max_iters=10)
    rec = dec.records[0]
    assert (rec.k, rec.response, rec.ell) == (0, ("x", "y"), 2)
    assert "".join(dec.sequence) == "abcxy"
    assert dec.iterations == 1 and dec.reason == "noMatch"


def test_compiled_u15_lockstep(u15, compiled_u15):
    dec = lockstep(compiled_u15.sys, initial_string(u15, "101001", 5), 10_000)
    assert dec.iterations == 10_000
    short = lockstep(compiled_u15.sys, initial_string(u15, "11", 1), 10_000)
    assert short.reason == "noMatch"


def test_table_model():
    model = make_table_model(LagSystem.from_rules([("ab", "c")]))
    assert model(("a", "b")) == ("c",)
    assert model(("b", "a")) is None


def test_table_model_exhaustive(compiled_u15):
    model = make_table_model(compiled_u15.sys)
    assert all(model(lhs) == rhs for lhs, rhs in compiled_u15.sys.rules.items())


def test_decode_errors():
    sysm = LagSystem.from_rules([("ab", "c")])
    with pytest.raises(InputTooShortError):
        ext_decode(make_table_model(sysm), "a")
    chatty = FunctionModel(lambda ctx: ("a", "b", "c"), 2, max_out=2)
    with pytest.raises(MalformedResponseError):
        ext_decode(chatty, "ab")


def test_halt_symbol_stops_decoding():
    sysm = LagSystem.from_rules([("aa", "h")], halt="h")
    dec = ext_decode(make_table_model(sysm), "aa", sysm.halt)
    assert dec.reason == "haltSymbol" and "".join(dec.sequence) == "aah"


# -- codec ------------------------------------------------------------------------


def test_codec_positions():
    codec = build_codec([f"s{i}" for i in range(30)])
    assert codec.encode("s0") == ("A", "a")
    assert codec.encode("s27") == ("B", "b")
    assert codec.encode("s25") == ("A", "z")


def test_codec_round_trip(compiled_u15):
    alphabet = compiled_u15.sys.alphabet
    assert len(alphabet) <= CODEC_CAPACITY
    codec = build_codec(compiled_u15.sys)
    pairs = [codec.encode(s) for s in alphabet]
    assert len(set(pairs)) == len(pairs)
    assert all(codec.decode(*codec.encode(s)) == s for s in alphabet)
    assert codec.decode_tokens(codec.encode_word(alphabet)) == alphabet


def test_codec_capacity():
    build_codec(range(CODEC_CAPACITY))
    with pytest.raises(CodecError):
        build_codec(range(CODEC_CAPACITY + 1))


def test_codec_rejects_unknown():
    codec = build_codec("ab")
    with pytest.raises(CodecError):
        codec.encode("z")
    with pytest.raises(CodecError):
        codec.decode("Z", "z")
    with pytest.raises(CodecError):
        codec.decode_tokens(["A"])


# -- prompt packs -------------------------------------------------------------------


def letter_codec(symbols):
    """a -> (A, a), b -> (B, b), ..."""
    forward = {x: (x.upper(), x) for x in symbols}
    return TokenPairCodec(forward, {v: k for k, v in forward.items()})


def test_single_rule_line():
    sysm = LagSystem.from_rules([("ab", "c")])
    pack = emit_prompt_pack(sysm, letter_codec("abc"))
    assert pack.rule_lines == ["A a B b -> C c"]
    assert pack.render() == "A a B b -> C c\n"


def test_pair_response_line():
    sysm = LagSystem.from_rules([("ab", "ca")])
    pack = emit_prompt_pack(sysm, letter_codec("abc"))
    assert pack.rule_lines == ["A a B b -> C c A a"]


def test_preamble_and_repeat():
    sysm = LagSystem.from_rules([("ab", "c"), ("ba", "c")])
    pack = emit_prompt_pack(sysm, letter_codec("abc"), preamble="Follow the rules.\n", repeat=2)
    lines = "A a B b -> C c\nB b A a -> C c\n"
    assert pack.render() == "Follow the rules.\n\n" + lines * 2
    with pytest.raises(ValueError):
        emit_prompt_pack(sysm, build_codec(sysm), repeat=0)


def test_uncovered_symbol():
    sysm = LagSystem.from_rules([("ab", "c")])
    with pytest.raises(CodecError):
        emit_prompt_pack(sysm, build_codec("ab"))


def test_compiled_pack(compiled_u15, tmp_path):
    codec = build_codec(compiled_u15.sys)
    pack = emit_prompt_pack(compiled_u15.sys, codec, preamble="Apply exactly one rule.")
    assert len(pack.rule_lines) == len(compiled_u15.sys)
    assert pack.metadata["census"]["rules"] == len(compiled_u15.sys)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    pack.write(a)
    emit_prompt_pack(compiled_u15.sys, build_codec(compiled_u15.sys), preamble="Apply exactly one rule.").write(b)
    assert a.read_bytes() == b.read_bytes()
    assert parse_rule_lines(a.read_text(), codec) == dict(compiled_u15.sys.rules)


# -- transcripts -------------------------------------------------------------------


@pytest.fixture(scope="module")
def u15_oracle(compiled_u15):
    codec = build_codec(compiled_u15.sys)
    return codec, oracle_transcript(compiled_u15.sys, codec)


def test_oracle_transcript_passes(compiled_u15, u15_oracle, tmp_path):
    codec, records = u15_oracle
    path = tmp_path / "oracle.jsonl"
    write_transcript(records, path)
    first = path.read_text().splitlines()[0]
    assert first.startswith('{"context": [') and '"response": [' in first
    report = verify_transcript(compiled_u15.sys, codec, read_transcript(path))
    assert report.ok and report.failed == 0
    assert report.coverage == 1.0 and report.passed == len(compiled_u15.sys)
    assert all(r["ok"] for r in report.results)


def test_single_corruption_named(compiled_u15, u15_oracle):
    codec, records = u15_oracle
    records = list(records)
    i = 100
    rec = records[i]
    tokens = list(rec.response)
    tokens[1] = "z" if tokens[1] != "z" else "y"
    records[i] = dataclasses.replace(rec, response=tuple(tokens))
    report = verify_transcript(compiled_u15.sys, codec, records, render=str)
    assert report.failed == 1 and len(report.mismatches) == 1
    bad = report.mismatches[0]
    lhs = codec.decode_tokens(rec.context)
    assert bad["record"] == i
    assert bad["rule"] == " ".join(map(str, lhs))
    assert bad["expected"] == " ".join(rec.response)


def test_empty_transcript(compiled_u15):
    report = verify_transcript(compiled_u15.sys, build_codec(compiled_u15.sys), [])
    assert report.failed == 0 and report.coverage == 0.0


def test_undecodable_context():
    sysm = LagSystem.from_rules([("ab", "c")])
    codec = letter_codec("abc")
    with pytest.raises(TranscriptDecodeError) as err:
        verify_transcript(sysm, codec, [TranscriptRecord(("A", "a", "B", "b"), ("C", "c")),
                                        TranscriptRecord(("Q", "q", "B", "b"), ("C", "c"))])
    assert err.value.index == 1


def test_malformed_transcript_file(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text('{"context": ["A","a","B","b"], "response": ["C","c"]}\nnot json\n')
    with pytest.raises(TranscriptDecodeError) as err:
        read_transcript(path)
    assert err.value.index == 1


# -- properties ----------------------------------------------------------------------


@st.composite
def systems_and_words(draw):
    alphabet = "abcde"[: draw(st.integers(3, 5))]
    sym = st.sampled_from(alphabet)
    k = draw(st.integers(1, 2))
    table = draw(st.dictionaries(st.tuples(sym, sym), st.lists(sym, min_size=1, max_size=k).map(tuple), min_size=1))
    halt = draw(st.sets(sym, max_size=1))
    return LagSystem(2, k, table, frozenset(halt)), draw(st.lists(sym, min_size=2, max_size=20))


@settings(max_examples=200, deadline=None)
@given(systems_and_words())
def test_decode_lag_lockstep(case):
    sysm, w = case
    lockstep(sysm, w, 500)


@settings(max_examples=100, deadline=None)
@given(systems_and_words())
def test_pack_reconstructs_rules(case):
    sysm, _ = case
    codec = build_codec(sysm)
    text = emit_prompt_pack(sysm, codec).render()
    assert parse_rule_lines(text, codec) == dict(sysm.rules)
    assert text == emit_prompt_pack(sysm, build_codec(sysm)).render()
