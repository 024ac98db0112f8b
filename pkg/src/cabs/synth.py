"""Synthetic long-tailed annotation pools for benchmarking and demos.

Concept ranks follow a truncated power law (Zipf) and per-sample instance
counts are 1 + Poisson(lambda), tuned so the default pool has a median of
3 instances per sample. Samples are thematic the way web images are: one
primary concept is drawn from the rank law and the remaining instances
are a mix of repeats of it, rank-neighbours of it (multiplicative rank
jitter, which preserves the power-law marginal) and independent
background draws. Fully independent instances would make nearly every
sample carry a head concept, which no real image corpus does.
"""
from __future__ import annotations

import numpy as np

from .concepts import ConceptVocabulary, SampleAnnotation

DEFAULT_EXPONENT = 1.2
DEFAULT_EXTRA_MEAN = 2.35  # median of 1 + Poisson(2.35) is 3
DEFAULT_REPEAT_P = 0.3
DEFAULT_NEIGHBOR_P = 0.4
DEFAULT_NEIGHBOR_SIGMA = 0.35


def zipf_probabilities(n_concepts: int, exponent: float) -> np.ndarray:
    weights = np.arange(1, n_concepts + 1, dtype=np.float64) ** -exponent
    return weights / weights.sum()


def synthetic_vocabulary(n_concepts: int) -> ConceptVocabulary:
    width = len(str(max(n_concepts - 1, 1)))
    return ConceptVocabulary.from_names(f"concept {i:0{width}d}" for i in range(n_concepts))


def zipf_pool(
    n_samples: int,
    n_concepts: int,
    *,
    exponent: float = DEFAULT_EXPONENT,
    extra_mean: float = DEFAULT_EXTRA_MEAN,
    repeat_p: float = DEFAULT_REPEAT_P,
    neighbor_p: float = DEFAULT_NEIGHBOR_P,
    neighbor_sigma: float = DEFAULT_NEIGHBOR_SIGMA,
    seed: int = 0,
    with_captions: bool = False,
    vocab: ConceptVocabulary | None = None,
) -> list[SampleAnnotation]:
    """Draw a long-tailed pool of concept-annotated samples.

    ``repeat_p`` and ``neighbor_p`` control how the instances beyond the
    primary one are produced (repeat / rank-neighbour / independent
    background for the remainder); instances within one sample may repeat.
    Captions, when requested, simply list the sample's concept names.
    """
    if n_samples < 1 or n_concepts < 1:
        raise ValueError("n_samples and n_concepts must be positive")
    if repeat_p < 0 or neighbor_p < 0 or repeat_p + neighbor_p > 1:
        raise ValueError("repeat_p and neighbor_p must be a sub-probability pair")
    rng = np.random.default_rng(seed)
    probs = zipf_probabilities(n_concepts, exponent)
    multiplicities = 1 + rng.poisson(extra_mean, size=n_samples)
    primaries = rng.choice(n_concepts, size=n_samples, p=probs)

    if with_captions and vocab is None:
        vocab = synthetic_vocabulary(n_concepts)

    samples = []
    for i, (m, primary) in enumerate(zip(multiplicities, primaries)):
        ids = [int(primary)]
        for _ in range(int(m) - 1):
            u = rng.random()
            if u < repeat_p:
                ids.append(int(primary))
            elif u < repeat_p + neighbor_p:
                jitter = float(np.exp(rng.normal(0.0, neighbor_sigma)))
                rank = int(np.clip(round((primary + 1) * jitter), 1, n_concepts))
                ids.append(rank - 1)
            else:
                ids.append(int(rng.choice(n_concepts, p=probs)))
        scores = rng.uniform(0.3, 1.0, size=len(ids))
        caption = None
        if with_captions:
            caption = "a photo of " + " and ".join(vocab.name_of(c) for c in ids)
        samples.append(
            SampleAnnotation(
                sample_id=f"synth-{i:07d}",
                concepts=[(c, round(float(s), 4)) for c, s in zip(ids, scores)],
                caption=caption,
            )
        )
    return samples
