"""Offline balanced-subset baseline: cap each concept's sample count.

Two passes: the first counts, per concept, how many samples contain it;
the second keeps each annotated sample with probability
max_c min(1, threshold / F_c) over its distinct concepts, decided by a
seeded hash of the sample id. Samples whose every concept is common get
thinned toward the threshold, while any sample carrying a tail concept
(F_c <= threshold) is kept with certainty.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .concepts import ConceptId, SampleAnnotation

_HASH_DENOM = float(2**64)


class CurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CurationConfig:
    per_concept_threshold: int
    seed: int = 0
    target_size: int | None = None  # informational only

    def __post_init__(self) -> None:
        if self.per_concept_threshold < 1:
            raise CurationError("per_concept_threshold must be >= 1")


@dataclass
class CurationReport:
    kept: int = 0
    seen: int = 0
    dropped_no_concepts: int = 0
    before_counts: dict[ConceptId, int] = field(default_factory=dict)
    after_counts: dict[ConceptId, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kept": self.kept,
            "seen": self.seen,
            "dropped_no_concepts": self.dropped_no_concepts,
            "before_counts": {str(k): v for k, v in sorted(self.before_counts.items())},
            "after_counts": {str(k): v for k, v in sorted(self.after_counts.items())},
        }


def keep_decision(seed: int, sample_id: str) -> float:
    """Uniform [0,1) draw derived from (seed, sample_id); order-independent."""
    digest = hashlib.blake2b(
        sample_id.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little", signed=True)
    ).digest()
    return int.from_bytes(digest, "big") / _HASH_DENOM


def sample_frequencies(stream: Iterable[SampleAnnotation]) -> dict[ConceptId, int]:
    """Per-concept count of samples containing the concept (de-duplicated)."""
    freqs: dict[ConceptId, int] = {}
    for sample in stream:
        for c in sample.concept_set():
            freqs[c] = freqs.get(c, 0) + 1
    return freqs


def metaclip_curate(
    stream: Iterable[SampleAnnotation] | Callable[[], Iterable[SampleAnnotation]],
    config: CurationConfig,
    *,
    freqs: dict[ConceptId, int] | None = None,
) -> tuple[list[str], CurationReport]:
    """Balanced subsampling with a per-concept cap; returns kept ids + report.

    When ``freqs`` is not supplied the stream must be re-iterable (a
    sequence or zero-arg factory) because counting requires a first pass.
    """

    def open_stream() -> Iterable[SampleAnnotation]:
        if callable(stream):
            return stream()
        if isinstance(stream, (list, tuple)):
            return stream
        raise CurationError(
            "two-pass curation needs a re-iterable stream (sequence or factory); "
            "alternatively pass precomputed freqs"
        )

    if freqs is None:
        freqs = sample_frequencies(open_stream())
        second_pass = open_stream()
    elif callable(stream) or isinstance(stream, (list, tuple)):
        second_pass = open_stream()
    else:
        second_pass = stream

    t = config.per_concept_threshold
    report = CurationReport(before_counts=dict(freqs))
    kept_ids: list[str] = []
    for sample in second_pass:
        report.seen += 1
        concepts = sample.concept_set()
        if not concepts:
            report.dropped_no_concepts += 1
            continue
        p = max(min(1.0, t / freqs[c]) for c in concepts)
        if p >= 1.0 or keep_decision(config.seed, sample.sample_id) < p:
            kept_ids.append(sample.sample_id)
            report.kept += 1
            for c in concepts:
                report.after_counts[c] = report.after_counts.get(c, 0) + 1
    if report.seen == 0:
        raise CurationError("empty annotation stream")
    return kept_ids, report
