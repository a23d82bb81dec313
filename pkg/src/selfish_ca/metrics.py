"""Entropy and compression measures for spacetime diagrams, plus survival outcomes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Configuration, SpacetimeDiagram

LOG2_3 = math.log2(3)
DEFAULT_BLOCK_LENGTH = 4


class Outcome(str, enum.Enum):
    BLACK_ONLY = "black_only"
    GREY_ONLY = "grey_only"
    COEXIST = "coexist"
    EXTINCT = "extinct"

    def __str__(self) -> str:
        return self.value


OUTCOMES: tuple[Outcome, ...] = tuple(Outcome)


def outcome_from_counts(black: int, grey: int) -> Outcome:
    if black and grey:
        return Outcome.COEXIST
    if black:
        return Outcome.BLACK_ONLY
    if grey:
        return Outcome.GREY_ONLY
    return Outcome.EXTINCT


def entropy_from_counts(counts: Sequence[int] | np.ndarray) -> float:
    """Shannon entropy in bits of a histogram, with 0 log 0 = 0."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return max(0.0, float(-np.sum(p * np.log2(p))))


def _window_cells(row: Configuration | Sequence[int], window: tuple[int, int] | range | None) -> np.ndarray:
    if isinstance(row, Configuration):
        if window is None:
            window = (row.start, row.stop)
        elif isinstance(window, range):
            window = (window.start, window.stop)
        start, stop = window
        if stop <= start:
            raise ValueError(f"analysis window [{start}, {stop}) is empty")
        return row.window(start, stop)
    cells = np.asarray(row, dtype=np.uint8)
    if window is not None:
        start, stop = (window.start, window.stop) if isinstance(window, range) else window
        cells = cells[start:stop]
    if cells.size == 0:
        raise ValueError("analysis window is empty")
    return cells


def row_entropy(row: Configuration | Sequence[int], window: tuple[int, int] | range | None = None) -> float:
    """Bits per cell of the color distribution over ``window`` (half-open tape indices).

    For a :class:`Configuration` the window defaults to its support; for a
    plain sequence it slices positions.
    """
    cells = _window_cells(row, window)
    return entropy_from_counts(np.bincount(cells, minlength=3))


def block_words(cells: np.ndarray, k: int) -> np.ndarray:
    """Base-3 codes of the overlapping length-``k`` words, most significant cell first."""
    windows = np.lib.stride_tricks.sliding_window_view(cells.astype(np.int64), k)
    weights = 3 ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return windows @ weights


def block_entropy(
    row: Configuration | Sequence[int], window: tuple[int, int] | range | None = None, k: int = DEFAULT_BLOCK_LENGTH
) -> float:
    """Bits per block of the overlapping length-``k`` word distribution."""
    if k < 1:
        raise ValueError(f"block length must be >= 1, got {k}")
    cells = _window_cells(row, window)
    if k > cells.size:
        raise ValueError(f"block length {k} exceeds window length {cells.size}")
    _, counts = np.unique(block_words(cells, k), return_counts=True)
    return entropy_from_counts(counts)


def lz_complexity(sequence: Sequence[int] | np.ndarray) -> int:
    """Number of phrases in the LZ78 incremental parsing of ``sequence``.

    A phrase grows while it is already in the dictionary; the first symbol
    that makes it new closes it. A trailing phrase that is still a known
    entry counts as one more phrase.
    """
    children: dict[tuple[int, int], int] = {}
    node = 0
    phrases = 0
    for symbol in np.asarray(sequence).tolist():
        nxt = children.get((node, symbol))
        if nxt is None:
            phrases += 1
            children[(node, symbol)] = phrases
            node = 0
        else:
            node = nxt
    return phrases + (node != 0)


def classify_outcome(diagram: SpacetimeDiagram) -> Outcome:
    if not diagram.rows:
        raise ValueError("diagram has no rows")
    final = diagram.final
    return outcome_from_counts(final.count(2), final.count(1))


@dataclass(frozen=True, eq=False)
class MetricsReport:
    """Complexity summary of a diagram over an analysis window.

    ``counts[t]`` holds (white, grey, black) cell counts of row ``t``;
    ``row_entropy[t]`` its bits per cell. The block entropy and LZ78 phrase
    counts describe the final row (LZ78 on its trimmed support).
    """

    window: tuple[int, int]
    counts: np.ndarray
    row_entropy: np.ndarray
    k: int
    block_entropy: float
    lz_complexity: int
    outcome: Outcome
    lz_complexity_diagram: int | None = None

    @property
    def final_counts(self) -> tuple[int, int, int]:
        white, grey, black = (int(c) for c in self.counts[-1])
        return white, grey, black

    @property
    def final_row_entropy(self) -> float:
        return float(self.row_entropy[-1])

    def to_dict(self) -> dict:
        white, grey, black = self.final_counts
        return {
            "window": list(self.window),
            "outcome": self.outcome.value,
            "final_counts": {"white": white, "grey": grey, "black": black},
            "row_entropy": self.final_row_entropy,
            "block_entropy_k": {"k": self.k, "value": self.block_entropy},
            "lz_complexity": self.lz_complexity,
            "lz_complexity_diagram": self.lz_complexity_diagram,
            "counts_per_row": self.counts.tolist(),
            "row_entropy_per_row": self.row_entropy.tolist(),
        }


def summarize(
    diagram: SpacetimeDiagram,
    k: int = DEFAULT_BLOCK_LENGTH,
    window: tuple[int, int] | None = None,
    diagram_lz: bool = False,
) -> MetricsReport:
    """Compute every metric; the window defaults to the light cone of the last row.

    An all-white start has an empty light cone and yields zero counts,
    entropies and phrase counts.
    """
    if window is None:
        window = diagram.light_cone()
    start, stop = window
    n_rows = len(diagram.rows)
    if stop <= start:
        return MetricsReport(
            window=(start, stop),
            counts=np.zeros((n_rows, 3), dtype=np.int64),
            row_entropy=np.zeros(n_rows),
            k=k,
            block_entropy=0.0,
            lz_complexity=lz_complexity(diagram.final.cells),
            outcome=classify_outcome(diagram),
            lz_complexity_diagram=0 if diagram_lz else None,
        )
    dense = diagram.to_array(start, stop)
    counts = np.stack([np.bincount(r, minlength=3) for r in dense]).astype(np.int64)
    return MetricsReport(
        window=(start, stop),
        counts=counts,
        row_entropy=np.array([entropy_from_counts(c) for c in counts]),
        k=k,
        block_entropy=block_entropy(dense[-1], k=k),
        lz_complexity=lz_complexity(diagram.final.cells),
        outcome=classify_outcome(diagram),
        lz_complexity_diagram=lz_complexity(dense.ravel(order="F")) if diagram_lz else None,
    )
