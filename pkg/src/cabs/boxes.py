"""Weighted box fusion across detection sources (e.g. image resolutions).

Boxes from all sources are pooled, sorted by descending confidence, and
clustered sequentially: a box joins the first cluster of the same class
whose running fused box it overlaps (IoU above the threshold), otherwise
it starts a new cluster. Cluster members are averaged with
confidence-derived weights, fused scores are rescaled by how many of the
n sources supported the cluster, and an optional stricter second pass
keeps only the best box among near-duplicates of a class.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

from .concepts import BoundingBox

RESCALE_MODES = ("clip", "linear")


class FusionError(ValueError):
    """Fatal box-fusion input problem."""


@dataclass(frozen=True)
class WbfConfig:
    iou_threshold: float = 0.29
    post_threshold: float = 0.5
    rescale_mode: str = "clip"
    n_sources: int = 4

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold < 1.0:
            raise FusionError("iou_threshold must lie in (0, 1)")
        if not 0.0 < self.post_threshold < 1.0:
            raise FusionError("post_threshold must lie in (0, 1)")
        if self.rescale_mode not in RESCALE_MODES:
            raise FusionError(f"rescale_mode must be one of {RESCALE_MODES}")
        if self.n_sources < 1:
            raise FusionError("n_sources must be positive")


@dataclass(frozen=True)
class DetectionSet:
    """All boxes one source (resolution) produced for one image."""

    boxes: tuple[BoundingBox, ...]
    resolution_id: int
    resolution_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.resolution_weight <= 0:
            raise FusionError("resolution_weight must be positive")


@dataclass(frozen=True)
class FusedDetection:
    box: BoundingBox
    cluster_size: int
    n_resolutions: int

    def __post_init__(self) -> None:
        if self.cluster_size < 1:
            raise FusionError("cluster_size must be >= 1")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 for an empty union."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = max(0.0, ix) * max(0.0, iy)
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@dataclass
class _Cluster:
    members: list[tuple[BoundingBox, float]]  # (box, fusion weight)
    fused: BoundingBox
    resolutions: set[int] = field(default_factory=set)


def _hulled(value: float, components: list[float]) -> float:
    # Clamp into the member min/max so averages of identical values are
    # bit-exact and fused coordinates never leave the member hull.
    return min(max(value, min(components)), max(components))


def fuse(cluster: Sequence[tuple[BoundingBox, float]]) -> BoundingBox:
    """Weight-averaged coordinates and score of a cluster.

    Weights are per-box fusion weights (source weight times confidence);
    they must not all be zero. Every averaged component is clamped into
    the members' min/max range.
    """
    if not cluster:
        raise FusionError("empty cluster")
    wsum = sum(w for _, w in cluster)
    if wsum <= 0.0:
        raise FusionError("cluster weights sum to zero")

    def avg(values: list[float]) -> float:
        total = sum(w * v for (_, w), v in zip(cluster, values))
        return _hulled(total / wsum, values)

    x1 = avg([b.x1 for b, _ in cluster])
    y1 = avg([b.y1 for b, _ in cluster])
    x2 = avg([b.x2 for b, _ in cluster])
    y2 = avg([b.y2 for b, _ in cluster])
    score = avg([b.score for b, _ in cluster])
    return BoundingBox(x1, y1, x2, y2, cluster[0][0].concept, score)


def cluster_boxes(
    weighted: Sequence[tuple[BoundingBox, float, int]], config: WbfConfig
) -> list[_Cluster]:
    """Sequentially assign confidence-sorted boxes to same-class clusters.

    ``weighted`` holds (box, fusion weight, resolution id) triples already
    sorted by descending confidence. Each box is matched against every
    existing cluster's *current* fused box in creation order and joins the
    first one of the same class with IoU strictly above the threshold.
    """
    clusters: list[_Cluster] = []
    for box, weight, res in weighted:
        target = None
        for cl in clusters:
            if cl.fused.concept == box.concept and iou(cl.fused, box) > config.iou_threshold:
                target = cl
                break
        if target is None:
            clusters.append(_Cluster([(box, weight)], box, {res}))
        else:
            target.members.append((box, weight))
            target.resolutions.add(res)
            target.fused = fuse(target.members)
    return clusters


def rescale_scores(
    fused: Iterable[FusedDetection], config: WbfConfig
) -> list[FusedDetection]:
    """Downweight fused boxes supported by few of the n sources.

    clip mode: s *= min(cluster_size, n) / n (agreement beyond n is not
    rewarded); linear mode: s *= cluster_size / n, clamped at 1 so scores
    stay in [0, 1].
    """
    n = config.n_sources
    out = []
    for det in fused:
        if config.rescale_mode == "clip":
            factor = min(det.cluster_size, n) / n
        else:
            factor = det.cluster_size / n
        score = min(1.0, det.box.score * factor)
        out.append(replace(det, box=replace(det.box, score=score)))
    return out


def post_filter(
    fused: Sequence[FusedDetection], config: WbfConfig
) -> list[FusedDetection]:
    """Drop near-duplicate boxes of a class after rescaling.

    Re-clusters sequentially in input order (anchored on each cluster's
    first member) at the stricter post threshold, keeps the
    highest-scoring member per cluster (ties: earliest in input order)
    and returns survivors sorted by descending score.
    """
    anchors: list[tuple[FusedDetection, FusedDetection]] = []  # (anchor, best)
    for det in fused:
        joined = False
        for i, (anchor, best) in enumerate(anchors):
            if (
                anchor.box.concept == det.box.concept
                and iou(anchor.box, det.box) > config.post_threshold
            ):
                if det.box.score > best.box.score:
                    anchors[i] = (anchor, det)
                joined = True
                break
        if not joined:
            anchors.append((det, det))
    survivors = [best for _, best in anchors]
    order = sorted(range(len(survivors)), key=lambda i: (-survivors[i].box.score, i))
    return [survivors[i] for i in order]


def wbf(sets: Sequence[DetectionSet], config: WbfConfig | None = None) -> list[FusedDetection]:
    """Full fusion pipeline: pool, sort, cluster, fuse, rescale, post-filter."""
    config = config or WbfConfig()
    pooled: list[tuple[BoundingBox, float, int]] = []
    for ds in sets:
        for box in ds.boxes:
            pooled.append((box, ds.resolution_weight * box.score, ds.resolution_id))
    # Stable sort keeps pool order among equal confidences, making the
    # sequential clustering deterministic.
    pooled.sort(key=lambda item: -item[0].score)
    clusters = cluster_boxes(pooled, config)
    fused = [
        FusedDetection(cl.fused, len(cl.members), len(cl.resolutions)) for cl in clusters
    ]
    return post_filter(rescale_scores(fused, config), config)


def read_detection_sets(line: str) -> tuple[str, list[DetectionSet]]:
    """Parse one image's detections from the JSONL interchange format."""
    obj = json.loads(line)
    if not isinstance(obj, dict) or "id" not in obj:
        raise FusionError("detection record must be an object with an 'id'")
    by_res: dict[int, list[BoundingBox]] = {}
    for det in obj.get("detections", []):
        res = int(det["res"])
        x1, y1, x2, y2 = (float(v) for v in det["box"])
        by_res.setdefault(res, []).append(
            BoundingBox(x1, y1, x2, y2, det["class"], float(det["score"]))
        )
    sets = [DetectionSet(tuple(boxes), res) for res, boxes in sorted(by_res.items())]
    return obj["id"], sets


def format_fused(image_id: str, fused: Sequence[FusedDetection]) -> str:
    """Render fused detections back to one JSONL line."""
    dets = [
        {
            "box": [d.box.x1, d.box.y1, d.box.x2, d.box.y2],
            "class": d.box.concept,
            "score": d.box.score,
            "cluster_size": d.cluster_size,
        }
        for d in fused
    ]
    return json.dumps({"id": image_id, "detections": dets}, ensure_ascii=False)


def fuse_detection_file(
    source: str | Path | IO[str], config: WbfConfig | None = None
) -> Iterator[str]:
    """Fuse every image record of a detections JSONL stream."""
    config = config or WbfConfig()
    fh: IO[str]
    owned = False
    if hasattr(source, "read"):
        fh = source  # type: ignore[assignment]
    else:
        fh = open(source, encoding="utf-8")
        owned = True
    try:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            image_id, sets = read_detection_sets(line)
            yield format_fused(image_id, wbf(sets, config))
    finally:
        if owned:
            fh.close()
