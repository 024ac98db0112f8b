"""Composition statistics: batch histograms, dataset profiles, caption
adherence and word-count summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .concepts import (
    ConceptId,
    ConceptVocabulary,
    SampleAnnotation,
    lemmatize_plural,
    normalize_name,
)

CAPTION_FIELDS = ("caption", "recaption")


@dataclass(frozen=True)
class BatchComposition:
    unique_concepts: int
    concept_histogram: dict[ConceptId, int]
    max_frequency: int
    entropy: float  # natural-log Shannon entropy of the normalized histogram

    def to_json(self) -> dict:
        return {
            "unique_concepts": self.unique_concepts,
            "concept_histogram": {str(k): v for k, v in sorted(self.concept_histogram.items())},
            "max_frequency": self.max_frequency,
            "entropy": self.entropy,
        }


def batch_composition(samples: Iterable[SampleAnnotation]) -> BatchComposition:
    """Histogram over de-duplicated per-sample concept sets."""
    hist: dict[ConceptId, int] = {}
    for sample in samples:
        for c in sample.concept_set():
            hist[c] = hist.get(c, 0) + 1
    if not hist:
        return BatchComposition(0, {}, 0, 0.0)
    counts = np.array(list(hist.values()), dtype=np.float64)
    p = counts / counts.sum()
    entropy = float(-(p * np.log(p)).sum())
    return BatchComposition(len(hist), hist, int(counts.max()), entropy)


@dataclass
class DatasetProfile:
    """Streaming instance-level profile; ``merge`` is associative."""

    total_annotations: int = 0
    n_samples: int = 0
    per_concept_counts: dict[ConceptId, int] = field(default_factory=dict)
    per_sample_multiplicity: dict[int, int] = field(default_factory=dict)

    def add(self, sample: SampleAnnotation) -> None:
        ids = sample.concept_ids()
        self.n_samples += 1
        self.total_annotations += len(ids)
        for c in ids:
            self.per_concept_counts[c] = self.per_concept_counts.get(c, 0) + 1
        m = len(ids)
        self.per_sample_multiplicity[m] = self.per_sample_multiplicity.get(m, 0) + 1

    def merge(self, other: "DatasetProfile") -> "DatasetProfile":
        out = DatasetProfile(
            self.total_annotations + other.total_annotations,
            self.n_samples + other.n_samples,
            dict(self.per_concept_counts),
            dict(self.per_sample_multiplicity),
        )
        for c, n in other.per_concept_counts.items():
            out.per_concept_counts[c] = out.per_concept_counts.get(c, 0) + n
        for m, n in other.per_sample_multiplicity.items():
            out.per_sample_multiplicity[m] = out.per_sample_multiplicity.get(m, 0) + n
        return out

    @property
    def median_concept_count(self) -> float:
        if not self.per_concept_counts:
            return 0.0
        return float(np.median(list(self.per_concept_counts.values())))

    @property
    def median_multiplicity(self) -> float:
        if self.n_samples == 0:
            return 0.0
        return float(_histogram_median(self.per_sample_multiplicity))

    def to_json(self) -> dict:
        return {
            "total_annotations": self.total_annotations,
            "n_samples": self.n_samples,
            "per_concept_counts": {str(k): v for k, v in sorted(self.per_concept_counts.items())},
            "per_sample_multiplicity": {
                str(k): v for k, v in sorted(self.per_sample_multiplicity.items())
            },
            "median_concept_count": self.median_concept_count,
            "median_multiplicity": self.median_multiplicity,
        }


def _histogram_median(hist: Mapping[int, int]) -> float:
    total = sum(hist.values())
    lower_rank = (total - 1) // 2
    upper_rank = total // 2
    running = 0
    lower = upper = None
    for value in sorted(hist):
        running += hist[value]
        if lower is None and running > lower_rank:
            lower = value
        if running > upper_rank:
            upper = value
            break
    return (lower + upper) / 2


def dataset_profile(stream: Iterable[SampleAnnotation]) -> DatasetProfile:
    """Single pass over a stream; order-independent by construction."""
    profile = DatasetProfile()
    for sample in stream:
        profile.add(sample)
    return profile


@dataclass(frozen=True)
class AdherenceReport:
    exact_match_pct: float
    partial_match_pct: dict[float, float]
    corpus_size: int

    def to_json(self) -> dict:
        return {
            "exact_match_pct": self.exact_match_pct,
            "partial_match_pct": {str(t): p for t, p in sorted(self.partial_match_pct.items())},
            "corpus_size": self.corpus_size,
        }


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def token_similarity(a: str, b: str) -> float:
    """1 minus normalized edit distance."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def concept_forms(name: str) -> list[str]:
    """Surface forms tried during partial matching."""
    forms = [name, lemmatize_plural(name), name + "s"]
    if not name.endswith("ing"):
        forms.append(name + "ing")
    seen: list[str] = []
    for f in forms:
        if f and f not in seen:
            seen.append(f)
    return seen


def _exact_match(concept_tokens: Sequence[str], caption_tokens: Sequence[str]) -> bool:
    k = len(concept_tokens)
    if k == 0 or k > len(caption_tokens):
        return False
    target = tuple(concept_tokens)
    return any(
        tuple(caption_tokens[i : i + k]) == target
        for i in range(len(caption_tokens) - k + 1)
    )


def concept_adherence(
    samples: Iterable[SampleAnnotation],
    vocab: ConceptVocabulary,
    caption_field: str = "caption",
    taus: Sequence[float] = (0.6, 0.7, 0.8),
) -> AdherenceReport:
    """Fraction of (sample, concept) pairs recoverable from the caption.

    Exact: the concept's canonical name occurs as a contiguous token
    sequence in the normalized caption. Partial at tau: exact, or the
    best similarity between any concept surface form and any caption
    token reaches tau. Samples missing the caption field are skipped.
    """
    if caption_field not in CAPTION_FIELDS:
        raise ValueError(f"caption_field must be one of {CAPTION_FIELDS}")
    for t in taus:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"tau must lie in (0, 1]: {t}")
    pairs = 0
    exact_hits = 0
    best_sims: list[tuple[bool, float]] = []  # (exact, best fuzzy similarity)
    corpus = 0
    for sample in samples:
        caption = getattr(sample, caption_field)
        if caption is None:
            continue
        corpus += 1
        tokens = normalize_name(caption).split()
        for cid in sorted({c for c, _ in sample.concepts}):
            name = vocab.name_of(cid)
            exact = _exact_match(name.split(), tokens)
            best = 0.0
            if tokens:
                for form in concept_forms(name):
                    for tok in tokens:
                        s = token_similarity(form, tok)
                        if s > best:
                            best = s
            pairs += 1
            exact_hits += exact
            best_sims.append((exact, best))
    if pairs == 0:
        return AdherenceReport(0.0, {float(t): 0.0 for t in taus}, corpus)
    partial = {}
    for t in taus:
        hits = sum(1 for exact, best in best_sims if exact or best >= t)
        partial[float(t)] = 100.0 * hits / pairs
    return AdherenceReport(100.0 * exact_hits / pairs, partial, corpus)


@dataclass(frozen=True)
class WordCountStats:
    median: float
    mean: float
    stddev: float
    histogram: dict[int, int]

    def to_json(self) -> dict:
        return {
            "median": self.median,
            "mean": self.mean,
            "stddev": self.stddev,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def word_count_stats(
    samples: Iterable[SampleAnnotation], caption_field: str = "caption"
) -> WordCountStats:
    """Whitespace word counts with population statistics."""
    if caption_field not in CAPTION_FIELDS:
        raise ValueError(f"caption_field must be one of {CAPTION_FIELDS}")
    counts = []
    hist: dict[int, int] = {}
    for sample in samples:
        caption = getattr(sample, caption_field)
        if caption is None:
            continue
        n = len(caption.split())
        counts.append(n)
        hist[n] = hist.get(n, 0) + 1
    if not counts:
        return WordCountStats(0.0, 0.0, 0.0, {})
    arr = np.array(counts, dtype=np.float64)
    return WordCountStats(
        float(np.median(arr)), float(arr.mean()), float(arr.std()), hist
    )


def _csv_field(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def composition_csv(
    composition: BatchComposition, vocab: ConceptVocabulary | None = None
) -> str:
    """CSV histogram (count-descending) consumed by the plotting client."""
    lines = ["concept,count"]
    items = sorted(composition.concept_histogram.items(), key=lambda kv: (-kv[1], kv[0]))
    for cid, count in items:
        label = vocab.name_of(cid) if vocab is not None else str(cid)
        lines.append(f"{_csv_field(label)},{count}")
    return "\n".join(lines) + "\n"


def multiplicity_csv(profile: DatasetProfile) -> str:
    lines = ["multiplicity,samples"]
    for m in sorted(profile.per_sample_multiplicity):
        lines.append(f"{m},{profile.per_sample_multiplicity[m]}")
    return "\n".join(lines) + "\n"
