"""Turing machines, Lag systems and extended autoregressive decoding.

The package chains three reductions together:

* :mod:`lagmachine.machine` -- finite-memory Turing machine simulation
  (the behavioural oracle for everything else),
* :mod:`lagmachine.lag` and :mod:`lagmachine.control` -- deterministic Lag
  systems and the circular-queue position-control rule sets,
* :mod:`lagmachine.compiler` -- the Turing machine to (2,2)-Lag reduction,
* :mod:`lagmachine.decoding` -- extended autoregressive decoding over a
  deterministic model, the token-pair codec, prompt packs and transcripts.
"""

from lagmachine.machine import (
    TuringMachine,
    TapeState,
    build_u15_2,
    run_tm,
    tm_init,
    tm_step,
)
from lagmachine.lag import LagSystem, LagState, classify, lag_step, run_lag
from lagmachine.compiler import (
    CompiledSystem,
    Triple,
    compile_machine,
    decode_snapshot,
    initial_string,
    verify_equivalence,
)
from lagmachine.decoding import (
    TokenPairCodec,
    build_codec,
    emit_prompt_pack,
    ext_decode,
    make_table_model,
    verify_transcript,
)

__version__ = "0.1.0"

__all__ = [
    "TuringMachine",
    "TapeState",
    "build_u15_2",
    "run_tm",
    "tm_init",
    "tm_step",
    "LagSystem",
    "LagState",
    "classify",
    "lag_step",
    "run_lag",
    "CompiledSystem",
    "Triple",
    "compile_machine",
    "decode_snapshot",
    "initial_string",
    "verify_equivalence",
    "TokenPairCodec",
    "build_codec",
    "emit_prompt_pack",
    "ext_decode",
    "make_table_model",
    "verify_transcript",
]
