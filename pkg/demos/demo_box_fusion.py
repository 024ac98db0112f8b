"""Fuse bounding boxes detected at four image resolutions, step by step.

A detector run at several resolutions produces slightly shifted boxes for
the same objects plus the occasional single-resolution hallucination.
Weighted fusion averages the agreeing boxes and uses the agreement count
to rescale confidence, so the hallucination is kept but demoted.
"""
from cabs.boxes import DetectionSet, WbfConfig, wbf
from cabs.concepts import BoundingBox


def show(tag, boxes):
    print(tag)
    for b in boxes:
        print(f"  {b.concept:>6} score={b.score:.3f} box=({b.x1:.3f}, {b.y1:.3f}, {b.x2:.3f}, {b.y2:.3f})")


# the same dog seen by all four resolutions, with small localization jitter
dog = [
    BoundingBox(0.10, 0.20, 0.45, 0.80, "dog", 0.92),
    BoundingBox(0.11, 0.19, 0.46, 0.82, "dog", 0.88),
    BoundingBox(0.09, 0.21, 0.44, 0.79, "dog", 0.85),
    BoundingBox(0.10, 0.20, 0.46, 0.81, "dog", 0.90),
]
# a ball found only at the two higher resolutions
ball = [
    BoundingBox(0.60, 0.65, 0.72, 0.78, "ball", 0.74),
    BoundingBox(0.61, 0.66, 0.73, 0.79, "ball", 0.70),
]
# one low-resolution hallucination
ghost = BoundingBox(0.70, 0.05, 0.95, 0.30, "cat", 0.55)

sets = [
    DetectionSet((dog[0], ghost), resolution_id=384),
    DetectionSet((dog[1],), resolution_id=512),
    DetectionSet((dog[2], ball[0]), resolution_id=800),
    DetectionSet((dog[3], ball[1]), resolution_id=1000),
]

for ds in sets:
    show(f"resolution {ds.resolution_id}:", ds.boxes)

config = WbfConfig(iou_threshold=0.29, post_threshold=0.5, rescale_mode="clip", n_sources=4)
fused = wbf(sets, config)

print("\nfused (IoU threshold 0.29, clip rescaling over 4 sources):")
for det in fused:
    print(
        f"  {det.box.concept:>6} score={det.box.score:.3f} "
        f"cluster={det.cluster_size} resolutions={det.n_resolutions} "
        f"box=({det.box.x1:.3f}, {det.box.y1:.3f}, {det.box.x2:.3f}, {det.box.y2:.3f})"
    )

print("""
What happened:
  - the four dog boxes collapsed into one confidence-weighted average and
    keep their full score (4/4 sources agree);
  - the ball survives at half score (2/4 sources);
  - the cat hallucination drops to a quarter of its score (1/4) and would
    be easy to cut with a downstream confidence floor.""")
