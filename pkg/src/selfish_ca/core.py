"""Three-color radius-1 cellular automata built from two elementary rules.

Cells are white (0, free resource), grey (1) or black (2). A composite rule
is a 27-entry lookup table assembled from

* an elementary rule driving the black organism on black/white neighborhoods,
* an elementary rule driving the grey organism on grey/white neighborhoods,
* 12 freely chosen outcomes for the neighborhoods where both organisms meet,
* the fixed entry ``<0,0,0> -> 0``.

Because the all-white neighborhood always maps to white, an infinite tape
with finitely many live cells is simulated exactly by a finite window that
grows by at most one cell per side per step.

Neighborhoods are encoded as ``9*left + 3*center + right``; ascending codes
are the lexicographic order of the triples.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .rng import SplitMix64

__all__ = [
    "Color",
    "Neighborhood",
    "ElementaryRule",
    "MixedAssignment",
    "CompositeRule",
    "Configuration",
    "SpacetimeDiagram",
    "ALL_NEIGHBORHOODS",
    "MIXED_NEIGHBORHOODS",
    "MIXED_CODES",
    "decode_elementary",
    "mixed_neighborhoods",
    "classify_neighborhood",
    "sample_mixed_assignment",
    "compose",
    "step",
    "evolve",
    "standard_initial",
]


class Color(enum.IntEnum):
    WHITE = 0
    GREY = 1
    BLACK = 2


class Neighborhood(NamedTuple):
    left: int
    center: int
    right: int

    @property
    def code(self) -> int:
        return 9 * self.left + 3 * self.center + self.right

    @classmethod
    def from_code(cls, code: int) -> "Neighborhood":
        return cls(code // 9, (code // 3) % 3, code % 3)

    def __str__(self) -> str:
        return f"⟨{self.left},{self.center},{self.right}⟩"


ALL_NEIGHBORHOODS: tuple[Neighborhood, ...] = tuple(
    Neighborhood(*t) for t in itertools.product(range(3), repeat=3)
)


def classify_neighborhood(nbhd: Sequence[int]) -> str:
    """Return one of ``"quiescent"``, ``"grey"``, ``"black"`` or ``"mixed"``."""
    present = set(nbhd)
    if not present <= {0, 1, 2}:
        raise ValueError(f"not a neighborhood over {{0,1,2}}: {tuple(nbhd)}")
    if present == {0}:
        return "quiescent"
    if 1 in present and 2 in present:
        return "mixed"
    return "grey" if 1 in present else "black"


def mixed_neighborhoods() -> list[Neighborhood]:
    """The 12 neighborhoods holding both a grey and a black cell, in lexicographic order.

    The position in this list is the index used by :class:`MixedAssignment`.
    """
    return [n for n in ALL_NEIGHBORHOODS if classify_neighborhood(n) == "mixed"]


MIXED_NEIGHBORHOODS: tuple[Neighborhood, ...] = tuple(mixed_neighborhoods())
MIXED_CODES: np.ndarray = np.array([n.code for n in MIXED_NEIGHBORHOODS], dtype=np.intp)
_MIXED_INDEX = {n: i for i, n in enumerate(MIXED_NEIGHBORHOODS)}


@dataclass(frozen=True)
class ElementaryRule:
    """Two-color radius-1 rule in Wolfram numbering.

    ``bits[k]`` is the output for the neighborhood whose digits read as the
    binary numeral ``k``, so ``bits[7]`` belongs to ``111`` and ``bits[0]``
    to ``000``.
    """

    number: int
    bits: tuple[int, ...] = field(repr=False)

    @property
    def table(self) -> dict[tuple[int, int, int], int]:
        return {(k >> 2 & 1, k >> 1 & 1, k & 1): self.bits[k] for k in range(7, -1, -1)}

    def __call__(self, left: int, center: int, right: int) -> int:
        return self.bits[4 * left + 2 * center + right]

    def encode(self) -> int:
        return sum(bit << k for k, bit in enumerate(self.bits))

    @property
    def quiescent(self) -> bool:
        """True when ``000 -> 0``, i.e. the rule number is even."""
        return self.bits[0] == 0


def decode_elementary(number: int) -> ElementaryRule:
    if isinstance(number, bool) or not isinstance(number, (int, np.integer)):
        raise TypeError(f"rule number must be an integer, got {number!r}")
    if not 0 <= number <= 255:
        raise ValueError(f"rule number {number} out of range [0, 255]")
    number = int(number)
    return ElementaryRule(number, tuple((number >> k) & 1 for k in range(8)))


@dataclass(frozen=True)
class MixedAssignment:
    """Outcomes for the 12 mixed neighborhoods, in :data:`MIXED_NEIGHBORHOODS` order."""

    outcomes: tuple[int, ...]

    def __post_init__(self):
        outcomes = tuple(int(v) for v in self.outcomes)
        if len(outcomes) != len(MIXED_NEIGHBORHOODS):
            raise ValueError(f"expected 12 outcomes, got {len(outcomes)}")
        if any(v not in (0, 1, 2) for v in outcomes):
            raise ValueError(f"outcomes must lie in {{0,1,2}}: {outcomes}")
        object.__setattr__(self, "outcomes", outcomes)

    @classmethod
    def constant(cls, value: int) -> "MixedAssignment":
        return cls((value,) * len(MIXED_NEIGHBORHOODS))

    def __getitem__(self, nbhd: Sequence[int]) -> int:
        return self.outcomes[_MIXED_INDEX[Neighborhood(*nbhd)]]


def sample_mixed_assignment(stream: SplitMix64) -> MixedAssignment:
    """Draw the 12 outcomes uniformly from {0,1,2}, one stream draw each, in index order."""
    return MixedAssignment(tuple(stream.randbelow(3) for _ in MIXED_NEIGHBORHOODS))


@dataclass(frozen=True, eq=False)
class CompositeRule:
    """Full 27-entry three-color table; ``table[code]`` is the next color.

    ``zero_overridden`` records that one of the elementary rules maps ``000``
    to 1 and that this entry was forced back to white.
    """

    table: np.ndarray = field(repr=False)
    black_rule: ElementaryRule
    grey_rule: ElementaryRule
    mixed: MixedAssignment
    zero_overridden: bool = False

    def __call__(self, nbhd: Sequence[int]) -> int:
        return int(self.table[Neighborhood(*nbhd).code])

    def __eq__(self, other):
        if not isinstance(other, CompositeRule):
            return NotImplemented
        return bytes(self.table) == bytes(other.table) and self.mixed == other.mixed and (
            self.black_rule == other.black_rule and self.grey_rule == other.grey_rule
        )

    def __hash__(self):
        return hash(bytes(self.table))

    def items(self) -> Iterator[tuple[Neighborhood, int]]:
        for n in ALL_NEIGHBORHOODS:
            yield n, int(self.table[n.code])


def compose(black: ElementaryRule, grey: ElementaryRule, mixed: MixedAssignment) -> CompositeRule:
    table = np.zeros(27, dtype=np.uint8)
    for n in ALL_NEIGHBORHOODS:
        kind = classify_neighborhood(n)
        if kind == "grey":
            table[n.code] = grey(*n)
        elif kind == "black":
            table[n.code] = 2 * black(*(c // 2 for c in n))
        elif kind == "mixed":
            table[n.code] = mixed[n]
    table.flags.writeable = False
    overridden = not (black.quiescent and grey.quiescent)
    return CompositeRule(table, black, grey, mixed, overridden)


class Configuration:
    """Finitely supported tape; every cell outside ``cells`` is white.

    Construction trims leading and trailing white cells, so equal tapes have
    equal ``(offset, cells)``. ``offset`` is the tape index of ``cells[0]``;
    an all-white tape has no cells and offset 0.
    """

    __slots__ = ("offset", "cells")

    def __init__(self, cells: Sequence[int] | np.ndarray = (), offset: int = 0):
        arr = np.asarray(cells, dtype=np.int64).ravel()
        if arr.size and (arr.min() < 0 or arr.max() > 2):
            raise ValueError("cell colors must lie in {0,1,2}")
        live = np.flatnonzero(arr)
        if live.size == 0:
            arr, offset = np.zeros(0, dtype=np.uint8), 0
        else:
            offset = int(offset) + int(live[0])
            arr = arr[live[0] : live[-1] + 1].astype(np.uint8)
        arr.flags.writeable = False
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "cells", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Configuration is immutable")

    @classmethod
    def from_cells(cls, cells: dict[int, int]) -> "Configuration":
        if not cells:
            return cls()
        lo, hi = min(cells), max(cells)
        arr = np.zeros(hi - lo + 1, dtype=np.uint8)
        for i, c in cells.items():
            arr[i - lo] = c
        return cls(arr, lo)

    @property
    def start(self) -> int:
        return self.offset

    @property
    def stop(self) -> int:
        return self.offset + len(self.cells)

    @property
    def is_blank(self) -> bool:
        return len(self.cells) == 0

    def __len__(self) -> int:
        return len(self.cells)

    def __getitem__(self, index: int) -> int:
        i = index - self.offset
        if 0 <= i < len(self.cells):
            return int(self.cells[i])
        return 0

    def window(self, start: int, stop: int) -> np.ndarray:
        """Dense copy of tape indices ``start .. stop-1``."""
        if stop < start:
            raise ValueError(f"empty or reversed window [{start}, {stop})")
        out = np.zeros(stop - start, dtype=np.uint8)
        lo, hi = max(start, self.start), min(stop, self.stop)
        if lo < hi:
            out[lo - start : hi - start] = self.cells[lo - self.offset : hi - self.offset]
        return out

    def live_cells(self) -> dict[int, int]:
        return {self.offset + int(i): int(self.cells[i]) for i in np.flatnonzero(self.cells)}

    def count(self, color: int) -> int:
        return int(np.count_nonzero(self.cells == color))

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.offset, self.cells.tobytes()))

    def __repr__(self):
        body = "".join(str(c) for c in self.cells)
        return f"Configuration(offset={self.offset}, cells='{body}')"


@dataclass(frozen=True, eq=False)
class SpacetimeDiagram:
    rows: tuple[Configuration, ...]
    rule: CompositeRule

    @property
    def steps(self) -> int:
        return len(self.rows) - 1

    @property
    def final(self) -> Configuration:
        return self.rows[-1]

    def light_cone(self) -> tuple[int, int]:
        """Half-open tape span reachable from the initial support by the last row."""
        first = self.rows[0]
        if first.is_blank:
            return (0, 0)
        return (first.start - self.steps, first.stop + self.steps)

    def to_array(self, start: int | None = None, stop: int | None = None) -> np.ndarray:
        """Dense ``(T+1, stop-start)`` array; defaults to the light cone."""
        if start is None or stop is None:
            start, stop = self.light_cone()
        return np.stack([row.window(start, stop) for row in self.rows]) if self.rows else np.zeros((0, 0))

    def __eq__(self, other):
        if not isinstance(other, SpacetimeDiagram):
            return NotImplemented
        return self.rows == other.rows and self.rule == other.rule


def step(config: Configuration, rule: CompositeRule) -> Configuration:
    if config.is_blank:
        return config
    padded = np.zeros(len(config) + 4, dtype=np.uint8)
    padded[2:-2] = config.cells
    codes = 9 * padded[:-2] + 3 * padded[1:-1] + padded[2:]
    return Configuration(rule.table[codes], config.offset - 1)


def evolve(initial: Configuration, rule: CompositeRule, steps: int) -> SpacetimeDiagram:
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    rows = [initial]
    for _ in range(steps):
        rows.append(step(rows[-1], rule))
    return SpacetimeDiagram(tuple(rows), rule)


INITIAL_KINDS = ("solo-black", "solo-grey", "interaction")
DEFAULT_SEPARATION = 40


def standard_initial(kind: str, separation: int = DEFAULT_SEPARATION) -> Configuration:
    """Seed configurations: one black cell, one grey cell, or black at 0 and grey at ``separation``."""
    if kind == "solo-black":
        return Configuration([Color.BLACK])
    if kind == "solo-grey":
        return Configuration([Color.GREY])
    if kind == "interaction":
        if isinstance(separation, bool) or not isinstance(separation, (int, np.integer)) or separation < 1:
            raise ValueError(f"separation must be a positive integer, got {separation!r}")
        return Configuration.from_cells({0: Color.BLACK, int(separation): Color.GREY})
    raise ValueError(f"unknown initial kind {kind!r}; expected one of {INITIAL_KINDS}")
