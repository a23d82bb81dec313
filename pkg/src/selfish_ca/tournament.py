"""Pairwise tournaments between elementary rules competing for white cells.

A trial is identified by ``(black_rule, grey_rule, sample, separation)``.
The sample index selects a fresh random contact table via
:func:`~selfish_ca.rng.derive_seed`; the separation places the grey seed
``d`` cells right of the black seed. Results are streamed in canonical
``(black, grey, sample, separation)`` order whatever the worker count.
"""

from __future__ import annotations

import collections
import concurrent.futures as cf
import multiprocessing
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernel
from .core import (
    MIXED_CODES,
    MixedAssignment,
    compose,
    decode_elementary,
    evolve,
    sample_mixed_assignment,
    standard_initial,
)
from .metrics import DEFAULT_BLOCK_LENGTH, OUTCOMES, Outcome, outcome_from_counts, summarize
from .rng import MASK64, SplitMix64, derive_seed

DEFAULT_SAMPLES = 32
DEFAULT_STEPS = 256
DEFAULT_SEPARATIONS = (1, 20, 40)
DEFAULT_SEED = 1
# pairs handed to a worker at a time
CHUNK_PAIRS = 16

_OUTCOME_CODES = {o: i for i, o in enumerate(OUTCOMES)}


def _check_rules(rules, name):
    rules = tuple(sorted({int(r) for r in rules}))
    if not rules:
        raise ValueError(f"{name} must be nonempty")
    if rules[0] < 0 or rules[-1] > 255:
        raise ValueError(f"{name} must lie in [0, 255]")
    return rules


@dataclass(frozen=True)
class ExperimentPlan:
    black_rules: tuple[int, ...] = tuple(range(256))
    grey_rules: tuple[int, ...] = tuple(range(256))
    samples_per_pair: int = DEFAULT_SAMPLES
    steps: int = DEFAULT_STEPS
    separations: tuple[int, ...] = DEFAULT_SEPARATIONS
    master_seed: int = DEFAULT_SEED
    k: int = DEFAULT_BLOCK_LENGTH

    def __post_init__(self):
        object.__setattr__(self, "black_rules", _check_rules(self.black_rules, "black_rules"))
        object.__setattr__(self, "grey_rules", _check_rules(self.grey_rules, "grey_rules"))
        seps = tuple(sorted({int(d) for d in self.separations}))
        if not seps or seps[0] < 1:
            raise ValueError("separations must be a nonempty set of integers >= 1")
        object.__setattr__(self, "separations", seps)
        if self.samples_per_pair < 1:
            raise ValueError("samples_per_pair must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        # the smallest analysis window is 2*steps + min(d) + 1 cells
        if not 1 <= self.k <= min(2 * self.steps + seps[0] + 1, 39):
            raise ValueError(f"block length k={self.k} out of range for this plan")

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(b, g) for b in self.black_rules for g in self.grey_rules]

    @property
    def trials_per_pair(self) -> int:
        return self.samples_per_pair * len(self.separations)

    @property
    def n_trials(self) -> int:
        return len(self.black_rules) * len(self.grey_rules) * self.trials_per_pair


@dataclass(frozen=True)
class TrialRecord:
    black_rule: int
    grey_rule: int
    sample_index: int
    separation: int
    derived_seed: int
    outcome: Outcome
    black_count: int
    grey_count: int
    white_count: int
    row_entropy: float
    block_entropy: float
    lz_complexity: int
    steps: int


METRIC_FIELDS = ("black_count", "grey_count", "white_count", "row_entropy", "block_entropy", "lz_complexity")


@dataclass(frozen=True)
class PairSummary:
    black_rule: int
    grey_rule: int
    trials: int
    outcome_frequencies: dict[str, float]
    means: dict[str, float]
    stddevs: dict[str, float]
    separation: int | None = None

    def to_dict(self) -> dict:
        out = {
            "black_rule": self.black_rule,
            "grey_rule": self.grey_rule,
            "trials": self.trials,
            "outcome_frequencies": self.outcome_frequencies,
            "metrics": {f: {"mean": self.means[f], "std": self.stddevs[f]} for f in METRIC_FIELDS},
        }
        if self.separation is not None:
            out["separation"] = self.separation
        return out


def summarize_pair(records: Sequence[TrialRecord], separation: int | None = None) -> PairSummary:
    """Outcome fractions and population mean/stddev of each metric."""
    if not records:
        raise ValueError("no records to summarize")
    n = len(records)
    tally = collections.Counter(r.outcome for r in records)
    values = {f: np.array([getattr(r, f) for r in records], dtype=np.float64) for f in METRIC_FIELDS}
    return PairSummary(
        black_rule=records[0].black_rule,
        grey_rule=records[0].grey_rule,
        trials=n,
        outcome_frequencies={o.value: tally[o] / n for o in OUTCOMES},
        means={f: float(v.mean()) for f, v in values.items()},
        stddevs={f: float(v.std()) for f, v in values.items()},
        separation=separation,
    )


def run_trial(
    black_rule: int,
    grey_rule: int,
    sample_index: int,
    separation: int,
    steps: int,
    k: int,
    master_seed: int,
    mixed: MixedAssignment | None = None,
) -> TrialRecord:
    """One trial through the reference engine (``core.evolve`` + ``metrics.summarize``).

    ``mixed`` replaces the sampled contact table when given.
    """
    seed = derive_seed(master_seed, black_rule, grey_rule, sample_index)
    if mixed is None:
        mixed = sample_mixed_assignment(SplitMix64(seed))
    rule = compose(decode_elementary(black_rule), decode_elementary(grey_rule), mixed)
    diagram = evolve(standard_initial("interaction", separation), rule, steps)
    report = summarize(diagram, k)
    white, grey, black = report.final_counts
    return TrialRecord(
        black_rule=black_rule,
        grey_rule=grey_rule,
        sample_index=sample_index,
        separation=separation,
        derived_seed=seed,
        outcome=report.outcome,
        black_count=black,
        grey_count=grey,
        white_count=white,
        row_entropy=report.final_row_entropy,
        block_entropy=report.block_entropy,
        lz_complexity=report.lz_complexity,
        steps=steps,
    )


@dataclass
class PairResult:
    """All trials of one rule pair as column arrays, in (sample, separation) order."""

    black_rule: int
    grey_rule: int
    steps: int
    samples: np.ndarray
    separations: np.ndarray
    seeds: np.ndarray
    counts: np.ndarray  # (n, 3): white, grey, black
    row_entropy: np.ndarray
    block_entropy: np.ndarray
    lz_complexity: np.ndarray
    _records: list[TrialRecord] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def records(self) -> list[TrialRecord]:
        if self._records is None:
            self._records = [
                TrialRecord(
                    black_rule=self.black_rule,
                    grey_rule=self.grey_rule,
                    sample_index=int(s),
                    separation=int(d),
                    derived_seed=int(seed),
                    outcome=outcome_from_counts(int(c[2]), int(c[1])),
                    black_count=int(c[2]),
                    grey_count=int(c[1]),
                    white_count=int(c[0]),
                    row_entropy=float(h),
                    block_entropy=float(bh),
                    lz_complexity=int(z),
                    steps=self.steps,
                )
                for s, d, seed, c, h, bh, z in zip(
                    self.samples,
                    self.separations,
                    self.seeds,
                    self.counts,
                    self.row_entropy,
                    self.block_entropy,
                    self.lz_complexity,
                )
            ]
        return self._records

    def summary(self) -> PairSummary:
        return summarize_pair(self.records)

    def by_separation(self) -> dict[int, PairSummary]:
        return {
            int(d): summarize_pair([r for r in self.records if r.separation == d], separation=int(d))
            for d in np.unique(self.separations)
        }


def run_pair(black_rule: int, grey_rule: int, plan: ExperimentPlan) -> PairResult:
    """All trials of one pair through the compiled batch engine."""
    base = compose(decode_elementary(black_rule), decode_elementary(grey_rule), MixedAssignment.constant(0)).table
    n_samples, seps = plan.samples_per_pair, np.array(plan.separations, dtype=np.int64)
    seeds = [derive_seed(plan.master_seed, black_rule, grey_rule, s) for s in range(n_samples)]
    mixed = np.array([sample_mixed_assignment(SplitMix64(seed)).outcomes for seed in seeds], dtype=np.uint8)
    tables = np.repeat(base[None, :], n_samples, axis=0)
    tables[:, MIXED_CODES] = mixed
    n = n_samples * len(seps)
    tables = np.ascontiguousarray(np.repeat(tables, len(seps), axis=0))
    trial_seps = np.tile(seps, n_samples)
    counts = np.zeros((n, 3), dtype=np.int64)
    row_h = np.zeros(n)
    block_h = np.zeros(n)
    lz = np.zeros(n, dtype=np.int64)
    _kernel.run_batch(tables, trial_seps, plan.steps, plan.k, counts, row_h, block_h, lz)
    return PairResult(
        black_rule=black_rule,
        grey_rule=grey_rule,
        steps=plan.steps,
        samples=np.repeat(np.arange(n_samples), len(seps)),
        separations=trial_seps,
        seeds=np.repeat(np.array(seeds, dtype=np.uint64), len(seps)),
        counts=counts,
        row_entropy=row_h,
        block_entropy=block_h,
        lz_complexity=lz,
    )


def _run_chunk(plan: ExperimentPlan, pairs: Sequence[tuple[int, int]]) -> list[PairResult]:
    return [run_pair(b, g, plan) for b, g in pairs]


def _chunks(pairs: list[tuple[int, int]], size: int) -> Iterator[list[tuple[int, int]]]:
    for i in range(0, len(pairs), size):
        yield pairs[i : i + size]


def run_tournament(plan: ExperimentPlan, workers: int = 1) -> Iterator[PairResult]:
    """Yield one :class:`PairResult` per pair in canonical (black, grey) order.

    Work is spread over ``workers`` processes with a bounded number of chunks
    in flight; results are re-ordered before being yielded, so the stream is
    identical for every worker count.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    _kernel.warm_up()
    chunks = _chunks(plan.pairs, CHUNK_PAIRS)
    if workers == 1:
        for chunk in chunks:
            yield from _run_chunk(plan, chunk)
        return
    ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else None)
    with cf.ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        pending: collections.deque[cf.Future] = collections.deque()
        for chunk in chunks:
            pending.append(pool.submit(_run_chunk, plan, chunk))
            if len(pending) >= 4 * workers:
                yield from pending.popleft().result()
        while pending:
            yield from pending.popleft().result()


def iter_records(results: Iterable[PairResult]) -> Iterator[TrialRecord]:
    for pair in results:
        yield from pair.records


def sensitivity_sweep(
    black_rule: int,
    grey_rule: int,
    separations: Sequence[int],
    samples: int,
    steps: int,
    k: int = DEFAULT_BLOCK_LENGTH,
    master_seed: int = DEFAULT_SEED,
) -> dict[int, PairSummary]:
    """Outcome statistics of one pair for each separation, over ``samples`` contact tables."""
    plan = ExperimentPlan(
        black_rules=(black_rule,),
        grey_rules=(grey_rule,),
        samples_per_pair=samples,
        steps=steps,
        separations=tuple(separations),
        master_seed=master_seed,
        k=k,
    )
    _kernel.warm_up()
    return run_pair(black_rule, grey_rule, plan).by_separation()


def default_workers() -> int:
    return os.cpu_count() or 1
