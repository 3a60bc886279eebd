"""Built-in machines, addressable by name from the command line."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

from lagmachine.machine import LEFT, RIGHT, TuringMachine, build_u15_2


def build_inc() -> TuringMachine:
    """Walk right over 1s, halt on the first blank."""
    return TuringMachine.from_table("A", "01", "0", "A", [("A", "0")], [("A", "1", "1", RIGHT, "A")], name="inc")


def build_right_walker() -> TuringMachine:
    """Write 1 and move right forever; every step past the input grows the tape."""
    return TuringMachine.from_table(
        "A", "01", "0", "A", [],
        [("A", "0", "1", RIGHT, "A"), ("A", "1", "1", RIGHT, "A")],
        name="right_walker",
    )


def build_zigzag() -> TuringMachine:
    """Bounce between end markers ``s`` and ``e``, flipping 0/1 on the way right.

    Started inside ``s ... e`` the head never reaches the delimiter, so the
    machine is a linear bounded automaton.
    """
    rows = [
        ("A", "0", "1", RIGHT, "A"),
        ("A", "1", "0", RIGHT, "A"),
        ("A", "e", "e", LEFT, "B"),
        ("B", "0", "0", LEFT, "B"),
        ("B", "1", "1", LEFT, "B"),
        ("B", "s", "s", RIGHT, "A"),
    ]
    return TuringMachine.from_table("AB", ("0", "1", "s", "e"), "0", "A", [], rows, name="zigzag")


def build_expander() -> TuringMachine:
    """Sweep right over 1s, turn a blank into 1, sweep back to the 0 in cell 1.

    The tape grows by one cell every round trip.
    """
    rows = [
        ("A", "1", "1", RIGHT, "A"),
        ("A", "0", "1", LEFT, "B"),
        ("B", "1", "1", LEFT, "B"),
        ("B", "0", "0", RIGHT, "A"),
    ]
    return TuringMachine.from_table("AB", "01", "0", "B", [], rows, name="expander")


BUILTIN: dict[str, Callable[[], TuringMachine]] = {
    "u15_2": build_u15_2,
    "inc": build_inc,
    "right_walker": build_right_walker,
    "zigzag": build_zigzag,
    "expander": build_expander,
}


def resolve_machine(name: str) -> TuringMachine:
    """A built-in name or a path to a machine JSON file."""
    if name in BUILTIN:
        return BUILTIN[name]()
    path = Path(name)
    if not path.exists():
        raise FileNotFoundError(f"no built-in machine or file named {name!r} (built-ins: {', '.join(BUILTIN)})")
    return TuringMachine.load(path)
