"""Scoring strategies: constant (IID), concept-count (FM) and greedy
diversity maximization (DM).

DM builds the sub-batch iteratively: per-concept target counts t_c are
derived from the superbatch so they sum to roughly b, and each step picks
the sample with the highest gain

    g(i) = (1/|C_i|) * sum_{c in C_i, n_c < t_c} [ (t_c - n_c)/t_c + 1/F_c ]

over the de-duplicated concept set C_i, where n_c counts prior picks
containing c and F_c is the concept's superbatch frequency. A sample
whose concepts are all at target contributes nothing, and once any of a
sample's concepts reaches its target the sample becomes ineligible for
the gain phase, which is what keeps per-concept counts capped. Gains only
ever decrease as n_c grows, so the selection loop re-scores candidates
lazily off a max-heap instead of rescoring the whole superbatch each
step; the result is identical to exhaustive rescoring.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .concepts import ConceptId, SampleAnnotation
from .sampler import SamplerError, ScoringStrategy, Superbatch

log = logging.getLogger(__name__)


def iid_score(sample: SampleAnnotation) -> float:
    """Constant gain; top-k then degenerates to taking the superbatch head."""
    return 1.0


def fm_score(sample: SampleAnnotation) -> int:
    """Concept instance count (repeats included), the frequency-maximization gain."""
    return len(sample.concepts)


class IidStrategy(ScoringStrategy):
    name = "iid"
    stateful = False

    def score(self, sample: SampleAnnotation, superbatch: Superbatch) -> float:
        return iid_score(sample)


class FmStrategy(ScoringStrategy):
    name = "fm"
    stateful = False

    def score(self, sample: SampleAnnotation, superbatch: Superbatch) -> float:
        return float(fm_score(sample))


@dataclass(frozen=True)
class DmParams:
    """Diversity-maximization knobs.

    ``max_concept_frequency`` caps any concept's target count per
    sub-batch, ``min_samples_concept`` floors it. ``rarity_epsilon`` only
    guards the deficit-gain variant's division. ``rarity_weight`` scales
    the 1/F_c bonus and exists so the balance term can be isolated in
    tests (0 disables the bonus).
    """

    max_concept_frequency: int = 40
    min_samples_concept: int = 1
    rarity_epsilon: float = 1e-8
    rarity_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.max_concept_frequency < 1 or self.min_samples_concept < 1:
            raise SamplerError("DM caps must be positive")
        if self.min_samples_concept > self.max_concept_frequency:
            raise SamplerError("min_samples_concept must not exceed max_concept_frequency")
        if self.rarity_epsilon <= 0:
            raise SamplerError("rarity_epsilon must be positive")


def superbatch_concept_sets(superbatch: Superbatch) -> list[tuple[ConceptId, ...]]:
    return [s.concept_set() for s in superbatch.samples]


def concept_frequencies(
    concept_sets: Sequence[Sequence[ConceptId]], size: int | None = None
) -> np.ndarray:
    """F_c: number of superbatch samples whose de-duplicated set contains c."""
    if size is None:
        size = max((max(cs) for cs in concept_sets if cs), default=-1) + 1
    freqs = np.zeros(size, dtype=np.int64)
    for cs in concept_sets:
        for c in cs:
            freqs[c] += 1
    return freqs


def compute_targets(
    superbatch: Superbatch, params: DmParams, b: int
) -> np.ndarray:
    """Per-concept target counts t_c enforcing approximate sub-batch uniformity.

    t_c = clamp(ceil(b * mean_set_size / distinct_concepts),
                min_samples_concept, max_concept_frequency), further capped
    at the concept's superbatch frequency F_c; in the one-concept-per-sample
    case the targets sum to roughly b. A superbatch without any concept
    annotations yields all-zero targets (with a warning), which pushes the
    selector straight into its fill phase.
    """
    if len(superbatch) == 0:
        raise SamplerError("empty superbatch")
    sets = superbatch_concept_sets(superbatch)
    freqs = concept_frequencies(sets)
    distinct = int(np.count_nonzero(freqs))
    if distinct == 0:
        log.warning("superbatch has no concept annotations; all targets zero")
        return np.zeros_like(freqs)
    mean_set_size = sum(len(cs) for cs in sets) / len(sets)
    base = math.ceil(b * mean_set_size / distinct)
    clamped = min(max(base, params.min_samples_concept), params.max_concept_frequency)
    return np.minimum(clamped, freqs)


@dataclass
class GainState:
    """Evolving state of one DM selection pass."""

    targets: np.ndarray
    counts: np.ndarray
    freqs: np.ndarray
    rarity_weight: float = 1.0
    selected: list[int] = field(default_factory=list)
    heap: list[tuple[float, int]] = field(default_factory=list)


def dm_gain(concepts: Sequence[ConceptId], state: GainState) -> float:
    """Balance-plus-rarity gain averaged over the sample's concept set.

    Concepts already at target (or with zero target) contribute nothing;
    an empty set scores 0.
    """
    if not concepts:
        return 0.0
    targets = state.targets
    counts = state.counts
    freqs = state.freqs
    total = 0.0
    for c in concepts:
        t = targets[c]
        if t > 0 and counts[c] < t:
            total += (t - counts[c]) / t + state.rarity_weight / freqs[c]
    return total / len(concepts)


def dm_deficit_gain(concepts: Sequence[ConceptId], state: GainState, params: DmParams) -> float:
    """Deficit-over-frequency gain variant (un-averaged).

    Each concept below the hard frequency cap contributes
    max(0, t_c - n_c) / (F_c + eps); nothing gates whole-sample
    eligibility here, the cap only silences saturated concepts.
    """
    cap = params.max_concept_frequency
    eps = params.rarity_epsilon
    total = 0.0
    for c in concepts:
        if state.counts[c] < cap:
            deficit = state.targets[c] - state.counts[c]
            if deficit > 0:
                total += deficit / (state.freqs[c] + eps)
    return total


def _eligible(concepts: Sequence[ConceptId], state: GainState) -> bool:
    # A sample leaves the gain phase as soon as any of its concepts hits
    # its target; this is what bounds per-concept sub-batch counts.
    counts = state.counts
    targets = state.targets
    for c in concepts:
        if counts[c] >= targets[c]:
            return False
    return True


@dataclass
class DmSelection:
    positions: list[int]
    gain_phase_len: int


def dm_select(
    superbatch: Superbatch,
    b: int,
    params: DmParams,
    *,
    targets: np.ndarray | None = None,
    gain: str = "balance",
) -> DmSelection:
    """Greedily pick b superbatch positions maximizing the DM gain.

    Ties go to the smaller superbatch position. Candidates are kept in a
    max-heap keyed by their last computed gain; a popped entry whose gain
    is stale is re-scored and re-inserted (lazy greedy), which is exact
    because gains never increase between steps. Once every remaining gain
    is zero the sub-batch is topped up with unselected samples in
    superbatch order, so the result always has exactly b entries.

    ``gain`` selects the scoring rule: "balance" (the averaged
    balance+rarity gain with eligibility gating) or "deficit" (the
    un-averaged deficit/frequency variant).
    """
    n = len(superbatch)
    if b > n:
        raise SamplerError(f"b={b} exceeds superbatch length {n}")
    sets = superbatch_concept_sets(superbatch)
    size = max((max(cs) for cs in sets if cs), default=-1) + 1
    freqs = concept_frequencies(sets, size)
    if targets is None:
        targets = compute_targets(superbatch, params, b)
    else:
        targets = np.asarray(targets)
        if targets.shape[0] < size:
            raise SamplerError("targets array smaller than concept id range")
    state = GainState(
        targets=targets,
        counts=np.zeros(size, dtype=np.int64),
        freqs=freqs,
        rarity_weight=params.rarity_weight,
    )

    if gain == "balance":
        def current_gain(pos: int) -> float:
            cs = sets[pos]
            if not _eligible(cs, state):
                return 0.0
            return dm_gain(cs, state)
    elif gain == "deficit":
        def current_gain(pos: int) -> float:
            return dm_deficit_gain(sets[pos], state, params)
    else:
        raise SamplerError(f"unknown gain rule {gain!r}")

    heap = state.heap
    for pos in range(n):
        g = current_gain(pos)
        if g > 0.0:
            heap.append((-g, pos))
    heapq.heapify(heap)

    chosen = np.zeros(n, dtype=bool)
    selected = state.selected
    while len(selected) < b and heap:
        neg_g, pos = heapq.heappop(heap)
        if chosen[pos]:
            continue
        g = current_gain(pos)
        if g == -neg_g:
            # Stored key is current, hence the true maximum (and the
            # smallest position among equals, by heap order).
            selected.append(pos)
            chosen[pos] = True
            for c in sets[pos]:
                state.counts[c] += 1
        elif g > 0.0:
            heapq.heappush(heap, (-g, pos))
        # g == 0 candidates are dropped; the fill phase covers them.

    gain_phase_len = len(selected)
    if len(selected) < b:
        for pos in range(n):
            if not chosen[pos]:
                selected.append(pos)
                chosen[pos] = True
                if len(selected) == b:
                    break
    return DmSelection(selected, gain_phase_len)


class DmStrategy(ScoringStrategy):
    """Stateful diversity-maximization strategy (greedy, per superbatch)."""

    stateful = True

    def __init__(self, params: DmParams | None = None, *, gain: str = "balance"):
        self.params = params or DmParams()
        self.gain = gain
        self.name = "dm" if gain == "balance" else "dm-alg2"

    def select(self, superbatch: Superbatch, b: int) -> list[int]:
        return dm_select(superbatch, b, self.params, gain=self.gain).positions


def make_strategy(name: str, params: DmParams | None = None) -> ScoringStrategy:
    """CLI-facing strategy factory: iid, fm, dm or dm-alg2."""
    if name == "iid":
        return IidStrategy()
    if name == "fm":
        return FmStrategy()
    if name == "dm":
        return DmStrategy(params)
    if name == "dm-alg2":
        return DmStrategy(params, gain="deficit")
    raise SamplerError(f"unknown strategy {name!r}")
