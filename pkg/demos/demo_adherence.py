"""Measure how well captions mention the concepts annotated on a sample.

Compares a sloppy alt-text-style corpus against clean synthetic
recaptions: exact token matches, fuzzy partial matches at several
thresholds, and word-count statistics.
"""
from cabs.analytics import concept_adherence, word_count_stats
from cabs.concepts import ConceptVocabulary, SampleAnnotation

vocab = ConceptVocabulary.from_names(
    ["dog", "cat", "palm tree", "ball", "beach", "bicycle", "coffee cup"]
)


def sample(sid, names, caption, recaption):
    return SampleAnnotation(
        sid,
        concepts=[(vocab.id_of(n), 0.9) for n in names],
        caption=caption,
        recaption=recaption,
    )


corpus = [
    sample("a", ["dog", "ball"], "IMG_2043.JPG", "a dog chasing a ball on the grass"),
    sample("b", ["palm tree", "beach"], "vacation pix!!", "palm trees lining a sandy beach"),
    sample("c", ["cat"], "my cats being weird", "two cats sleeping on a windowsill"),
    sample("d", ["bicycle"], "new bike day", "a red bicycle leaning against a wall"),
    sample("e", ["coffee cup"], "morning", "a coffee cup next to an open laptop"),
    sample("f", ["dog", "cat"], "best friends", "a dog and a cat share a blanket"),
]

taus = [0.6, 0.7, 0.8]
print(f"{'field':>10} | {'exact %':>8} | " + " | ".join(f"tau={t} %" for t in taus))
print("-" * 56)
for field in ("caption", "recaption"):
    rep = concept_adherence(corpus, vocab, field, taus)
    partial = " | ".join(f"{rep.partial_match_pct[t]:7.1f}" for t in taus)
    print(f"{field:>10} | {rep.exact_match_pct:8.1f} | {partial}")

print()
for field in ("caption", "recaption"):
    stats = word_count_stats(corpus, field)
    print(f"{field}: median {stats.median:.0f} words, mean {stats.mean:.1f}, stddev {stats.stddev:.2f}")

print("""
Alt-texts barely name what is in the image while descriptive recaptions
recover most annotated concepts; loosening the fuzzy threshold admits
morphological variants ("cats" for cat) before eventually admitting
noise. Partial match percentages can only fall as tau rises.""")
