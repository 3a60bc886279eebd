"""Shared helpers for the test suite: random Lag systems and small machines."""

from __future__ import annotations

import random
from itertools import product

from lagmachine.lag import LagSystem

LETTERS = "abcde"

# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_lag_system(
    rng: random.Random,
    max_out: int,
    n_symbols: int | None = None,
    density: float = 1.0,
    with_halt: bool = False,
):
    """A deterministic (2, max_out) system over 3-5 letters.

    Each of the ``n^2`` contexts gets a rule with probability ``density``;
    ``with_halt`` adds one extra letter, reachable only as a rule output,
    that acts as a halt symbol.
    """
    n = n_symbols or rng.randint(3, 5)
    alphabet = LETTERS[:n]
    outputs = alphabet + ("h" if with_halt else "")
    rules = []
    for lhs in product(alphabet, repeat=2):
        if rng.random() < density:
            k = rng.randint(1, max_out)
            # keep the halt letter rare so that runs are not trivially short
            out = [rng.choice(outputs if rng.random() < 0.05 else alphabet) for _ in range(k)]
            rules.append((lhs, tuple(out)))
    if not rules:
        rules.append(((alphabet[0], alphabet[0]), (alphabet[0],)))
    return LagSystem.from_rules(rules, 2, max_out, halt="h" if with_halt else ()), alphabet


def random_word(rng: random.Random, alphabet: str, lo: int = 5, hi: int = 20) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))


def random_suite(seed: int = 20240531, count: int = 100):
    """``count`` (system, input) cases, alternating K = 1 and K = 2.

    A mix of total rule tables (run to the budget), tables with a halt symbol
    and slightly partial tables (halt on a missing rule).
    """
    rng = random.Random(seed)
    cases = []
    for i in range(count):
        flavour = (i // 2) % 3
        sysm, alphabet = random_lag_system(
            rng,
            1 if i % 2 == 0 else 2,
            density=0.95 if flavour == 2 else 1.0,
            with_halt=flavour == 1,
        )
        cases.append((sysm, random_word(rng, alphabet)))
    return cases
