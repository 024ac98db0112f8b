import pytest

from cabs.concepts import ConceptVocabulary, SampleAnnotation


@pytest.fixture
def small_vocab() -> ConceptVocabulary:
    names = ["ball", "cat", "tree", "car", "house", "bird", "boat", "dog", "chair", "lamp"]
    return ConceptVocabulary((n, 100 * (i + 1)) for i, n in enumerate(names))


def make_sample(sample_id: str, concept_ids, caption=None, recaption=None) -> SampleAnnotation:
    return SampleAnnotation(
        sample_id=sample_id,
        concepts=[(int(c), 0.9) for c in concept_ids],
        caption=caption,
        recaption=recaption,
    )


def make_samples(concept_lists) -> list[SampleAnnotation]:
    return [make_sample(f"s{i:04d}", ids) for i, ids in enumerate(concept_lists)]
