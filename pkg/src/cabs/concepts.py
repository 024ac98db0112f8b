"""Concept vocabulary and per-sample annotation data model.

The vocabulary maps canonical concept names to dense integer ids; all
hot-path sampling code works on those ids. Annotation records arrive as
newline-delimited JSON (one object per line) carrying concept *names*,
which are interned at ingest time. The module also ships the text
normalization and plural-lemmatization heuristics used to canonicalize
vocabulary entries, and an embedding-based dedup that merges
near-identical names given externally computed vectors.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

ConceptId = int

_WS_RUN = re.compile(r"\s+")


class VocabularyError(ValueError):
    """Raised for malformed or inconsistent vocabulary data."""


class AnnotationError(ValueError):
    """Raised for fatal annotation-file problems (unreadable, wrong schema)."""


def normalize_name(raw: str) -> str:
    """Canonicalize a concept name.

    Lowercases, replaces underscores with spaces, collapses whitespace
    runs to single spaces and strips the ends. Idempotent.
    """
    return _WS_RUN.sub(" ", raw.lower().replace("_", " ")).strip()


def _load_noun_exceptions() -> tuple[dict[str, str], frozenset[str]]:
    with resources.files("cabs.data").joinpath("noun_exceptions.json").open("rb") as fh:
        data = json.load(fh)
    return dict(data["irregular"]), frozenset(data["keep"])


_IRREGULAR, _KEEP_AS_IS = _load_noun_exceptions()


def _lemmatize_token(tok: str) -> str:
    if tok.endswith("'s"):
        tok = tok[:-2]
    elif tok.endswith("s'"):
        tok = tok[:-2] + "s"
    if tok in _KEEP_AS_IS:
        return tok
    if tok in _IRREGULAR:
        return _IRREGULAR[tok]
    if len(tok) >= 5 and tok.endswith("ies"):
        return tok[:-3] + "y"
    if len(tok) >= 4 and tok.endswith("es") and tok[:-2].endswith(("s", "x", "z", "ch", "sh")):
        return tok[:-2]
    if len(tok) >= 4 and tok.endswith("s") and not tok.endswith(("ss", "us", "is")):
        return tok[:-1]
    return tok


def lemmatize_plural(name: str) -> str:
    """Strip regular plural suffixes and possessives, token by token.

    Applies a fixed suffix-rule table (-s, -es, -ies->y, 's) guarded by
    the irregular/keep-as-is noun lists shipped in ``cabs/data``. Expects
    an already-normalized name. Idempotent.
    """
    return " ".join(_lemmatize_token(t) for t in name.split())


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in normalized [0,1] coordinates with a class and score."""

    x1: float
    y1: float
    x2: float
    y2: float
    concept: int | str
    score: float

    def __post_init__(self) -> None:
        if not (self.x1 <= self.x2 and self.y1 <= self.y2):
            raise ValueError(f"degenerate box corners: {self}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score outside [0,1]: {self.score}")

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass
class SampleAnnotation:
    """One image-text record: interned concept instances plus optional extras.

    ``concepts`` keeps one entry per detected instance, so a concept may
    repeat; ``concept_set()`` is the de-duplicated view used by
    diversity-oriented scoring.
    """

    sample_id: str
    concepts: list[tuple[ConceptId, float]]
    boxes: list[BoundingBox] = field(default_factory=list)
    caption: str | None = None
    recaption: str | None = None

    def concept_ids(self) -> list[ConceptId]:
        """Instance-level concept ids, repeats included."""
        return [c for c, _ in self.concepts]

    def concept_set(self) -> tuple[ConceptId, ...]:
        """Sorted de-duplicated concept ids."""
        return tuple(sorted({c for c, _ in self.concepts}))


class ConceptVocabulary:
    """Immutable ordered set of canonical concept names with global counts."""

    def __init__(self, entries: Iterable[tuple[str, int]]):
        names: list[str] = []
        counts: list[int] = []
        index: dict[str, int] = {}
        for name, count in entries:
            canon = normalize_name(name)
            if not canon:
                raise VocabularyError("empty concept name")
            if canon in index:
                raise VocabularyError(f"duplicate concept name after normalization: {canon!r}")
            if count < 0:
                raise VocabularyError(f"negative count for {canon!r}")
            index[canon] = len(names)
            names.append(canon)
            counts.append(int(count))
        self._names = tuple(names)
        self._counts = tuple(counts)
        self._index = index

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "ConceptVocabulary":
        return cls((n, 0) for n in names)

    @classmethod
    def load(cls, path: str | Path) -> "ConceptVocabulary":
        """Read a `<name>\\t<count>` file ordered by concept id."""
        entries = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                name, sep, count = line.rpartition("\t")
                if not sep:
                    raise VocabularyError(f"{path}:{line_no}: expected '<name>\\t<count>'")
                try:
                    entries.append((name, int(count)))
                except ValueError as exc:
                    raise VocabularyError(f"{path}:{line_no}: bad count {count!r}") from exc
        return cls(entries)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name, count in zip(self._names, self._counts):
                fh.write(f"{name}\t{count}\n")

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def counts(self) -> tuple[int, ...]:
        return self._counts

    def name_of(self, concept_id: ConceptId) -> str:
        return self._names[concept_id]

    def id_of(self, name: str) -> ConceptId:
        return self._index[name]

    def get_id(self, name: str) -> ConceptId | None:
        return self._index.get(name)


@dataclass(frozen=True)
class IngestIssue:
    """Record-level problem encountered while streaming an annotation file."""

    line_no: int
    message: str


def ingest_annotations(
    path: str | Path,
    vocab: ConceptVocabulary,
    *,
    start_line: int = 0,
    on_issue: Callable[[IngestIssue], None] | None = None,
) -> Iterator[SampleAnnotation]:
    """Stream SampleAnnotation records from a JSONL file in file order.

    Unknown concept names and malformed lines are reported through
    ``on_issue`` (default: logged warning) and the stream continues;
    an unreadable file raises. ``start_line`` restarts the stream from a
    0-based line offset; reported line numbers stay absolute.
    """
    report = on_issue if on_issue is not None else _log_issue
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line_no <= start_line:
                continue
            line = line.strip()
            if not line:
                continue
            try:
                record = _parse_record(line, vocab, line_no, report)
            except _RecordError as exc:
                report(IngestIssue(line_no, str(exc)))
                continue
            yield record


def _log_issue(issue: IngestIssue) -> None:
    log.warning("annotation line %d: %s", issue.line_no, issue.message)


class _RecordError(ValueError):
    pass


def _parse_record(
    line: str,
    vocab: ConceptVocabulary,
    line_no: int,
    report: Callable[[IngestIssue], None],
) -> SampleAnnotation:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise _RecordError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("id"), str):
        raise _RecordError("record must be an object with a string 'id'")
    raw_concepts = obj.get("concepts", [])
    if not isinstance(raw_concepts, list):
        raise _RecordError("'concepts' must be an array")

    concepts: list[tuple[ConceptId, float]] = []
    boxes: list[BoundingBox] = []
    for entry in raw_concepts:
        if not isinstance(entry, dict) or "name" not in entry:
            raise _RecordError("concept entries must be objects with a 'name'")
        cid = vocab.get_id(normalize_name(str(entry["name"])))
        if cid is None:
            report(IngestIssue(line_no, f"unknown concept {entry['name']!r} dropped"))
            continue
        score = float(entry.get("score", 1.0))
        concepts.append((cid, score))
        box = entry.get("box")
        if box is not None:
            try:
                x1, y1, x2, y2 = (float(v) for v in box)
                boxes.append(BoundingBox(x1, y1, x2, y2, cid, score))
            except (TypeError, ValueError) as exc:
                raise _RecordError(f"bad box for {entry['name']!r}: {exc}") from exc
    return SampleAnnotation(
        sample_id=obj["id"],
        concepts=concepts,
        boxes=boxes,
        caption=obj.get("caption"),
        recaption=obj.get("recaption"),
    )


def serialize_annotation(sample: SampleAnnotation, vocab: ConceptVocabulary) -> str:
    """Render one record back to its canonical JSON line (no trailing newline)."""
    boxes_by_pos: dict[int, BoundingBox] = {}
    remaining = list(sample.boxes)
    concepts = []
    for cid, score in sample.concepts:
        entry: dict = {"name": vocab.name_of(cid), "score": score}
        for i, box in enumerate(remaining):
            if box.concept == cid and box.score == score:
                entry["box"] = [box.x1, box.y1, box.x2, box.y2]
                remaining.pop(i)
                break
        concepts.append(entry)
    obj: dict = {"id": sample.sample_id, "concepts": concepts}
    if sample.caption is not None:
        obj["caption"] = sample.caption
    if sample.recaption is not None:
        obj["recaption"] = sample.recaption
    return json.dumps(obj, ensure_ascii=False)


def write_annotations(
    samples: Iterable[SampleAnnotation], path: str | Path, vocab: ConceptVocabulary
) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(serialize_annotation(sample, vocab) + "\n")
            n += 1
    return n


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension real vector with a strictly positive norm."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 1:
            raise ValueError("embedding must be 1-D")
        if float(np.linalg.norm(arr)) <= 0.0:
            raise ValueError("embedding norm must be positive")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class MergeGroup:
    """Connected component of near-duplicate names; survivor is kept."""

    indices: tuple[int, ...]
    survivor: str


def semantic_dedup(
    names: Sequence[str],
    vectors: Sequence[EmbeddingVector | np.ndarray | Sequence[float]],
    threshold: float,
) -> list[MergeGroup]:
    """Group names whose embeddings are near-duplicates.

    Builds connected components under cosine(v_i, v_j) >= threshold
    (single linkage, so chains merge transitively) and elects the
    lexicographically smallest name in each group as survivor. Groups are
    ordered by their smallest member index. Deterministic.
    """
    if len(names) != len(vectors):
        raise ValueError("names and vectors must be parallel lists")
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    if not names:
        return []
    rows = [v.values if isinstance(v, EmbeddingVector) else np.asarray(v, dtype=np.float64) for v in vectors]
    dims = {row.shape for row in rows}
    if len(dims) != 1:
        raise ValueError(f"embedding dimension mismatch: {sorted(dims)}")
    mat = np.stack(rows)
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero-norm embedding")
    unit = mat / norms[:, None]
    cos = unit @ unit.T

    parent = list(range(len(names)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ii, jj = np.where(cos >= threshold)
    for i, j in zip(ii.tolist(), jj.tolist()):
        if i < j:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    members: dict[int, list[int]] = {}
    for i in range(len(names)):
        members.setdefault(find(i), []).append(i)
    groups = []
    for root in sorted(members):
        idx = sorted(members[root])
        groups.append(MergeGroup(tuple(idx), min(names[i] for i in idx)))
    return groups
