"""Two elementary cellular automata competing for white cells on one tape."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Color,
    CompositeRule,
    Configuration,
    ElementaryRule,
    MixedAssignment,
    Neighborhood,
    SpacetimeDiagram,
    compose,
    decode_elementary,
    evolve,
    mixed_neighborhoods,
    sample_mixed_assignment,
    standard_initial,
    step,
)
from .metrics import Outcome, block_entropy, classify_outcome, lz_complexity, row_entropy, summarize  # noqa: E402
from .rng import SplitMix64, derive_seed  # noqa: E402
