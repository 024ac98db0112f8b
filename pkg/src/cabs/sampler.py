"""Superbatch buffering, top-k sub-batch selection and batch-index emission.

The sampler partitions an annotation stream into consecutive superbatches
of size B, scores each sample with a pluggable strategy and keeps the top
b = round((1-f)*B) of them. Stateless strategies are scored sample by
sample and ranked with ``select_topk``; stateful strategies build the
whole sub-batch themselves. Selected batches are emitted as a line-based
wire format that downstream training clients parse.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, IO, Iterable, Iterator, Sequence

import numpy as np

from .concepts import SampleAnnotation

log = logging.getLogger(__name__)

WIRE_HEADER_PREFIX = "#cabs-batches v1"


class SamplerError(RuntimeError):
    """Fatal sampler configuration or stream problem."""


class SinkError(SamplerError):
    """Sink write failure; carries partial-progress information."""

    def __init__(self, message: str, superbatches_done: int, samples_selected: int):
        super().__init__(
            f"{message} (progress: {superbatches_done} superbatches, "
            f"{samples_selected} samples selected)"
        )
        self.superbatches_done = superbatches_done
        self.samples_selected = samples_selected


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SamplerConfig:
    """Run parameters; ``sub_batch_size`` is derived, never set directly."""

    superbatch_size: int
    filter_ratio: float = 0.0
    seed: int = 0
    epochs: int = 1
    shuffle_buffer: int = 0

    def __post_init__(self) -> None:
        if self.superbatch_size < 1:
            raise SamplerError("superbatch_size must be positive")
        if not 0.0 <= self.filter_ratio < 1.0:
            raise SamplerError("filter_ratio must lie in [0, 1)")
        if self.epochs < 1:
            raise SamplerError("epochs must be positive")
        if self.shuffle_buffer < 0:
            raise SamplerError("shuffle_buffer must be >= 0")
        if self.sub_batch_size < 1:
            raise SamplerError("derived sub-batch size is zero; lower filter_ratio")

    @property
    def sub_batch_size(self) -> int:
        return round_half_up((1.0 - self.filter_ratio) * self.superbatch_size)


@dataclass
class Superbatch:
    """A buffered window of samples plus their global stream ordinals."""

    samples: list[SampleAnnotation]
    origin_indices: list[int]
    epoch: int

    def __post_init__(self) -> None:
        if len(self.samples) != len(self.origin_indices):
            raise SamplerError("samples and origin_indices length mismatch")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SelectedBatch:
    epoch: int
    batch_seq: int
    indices: tuple[int, ...]
    strategy: str

    def __post_init__(self) -> None:
        if len(set(self.indices)) != len(self.indices):
            raise SamplerError(f"duplicate indices in batch {self.epoch}/{self.batch_seq}")


class ScoringStrategy:
    """Pluggable per-sample gain heuristic.

    Stateless strategies implement ``score`` and are ranked via
    ``select_topk``; stateful ones (whose score depends on what is already
    in the sub-batch) implement ``select`` and return superbatch positions
    in selection order. State never crosses superbatch boundaries.
    """

    name: str = "?"
    stateful: bool = False

    def score(self, sample: SampleAnnotation, superbatch: Superbatch) -> float:
        raise NotImplementedError

    def select(self, superbatch: Superbatch, b: int) -> list[int]:
        raise NotImplementedError


def select_topk(scores: Sequence[float], k: int) -> list[int]:
    """Indices of the k largest scores, ties broken by smaller index.

    The result is ordered by descending score then ascending index, so a
    constant score vector reproduces the first k input positions.
    """
    n = len(scores)
    if k > n:
        raise SamplerError(f"k={k} exceeds number of scores ({n})")
    if k < 0:
        raise SamplerError("k must be >= 0")
    arr = np.asarray(scores, dtype=np.float64)
    if np.isnan(arr).any():
        raise SamplerError("NaN score is not orderable; strategy must not emit NaN")
    order = np.argsort(-arr, kind="stable")
    return order[:k].tolist()


def buffered_shuffle(
    stream: Iterable, buffer_size: int, rng: np.random.Generator
) -> Iterator:
    """Seeded streaming shuffle over a bounded buffer (TF-style)."""
    if buffer_size <= 1:
        yield from stream
        return
    buf: list = []
    for item in stream:
        if len(buf) < buffer_size:
            buf.append(item)
            continue
        slot = int(rng.integers(len(buf)))
        buf[slot], item = item, buf[slot]
        yield item
    while buf:
        slot = int(rng.integers(len(buf)))
        buf[slot], last = buf[-1], buf[slot]
        buf.pop()
        yield last


def iter_superbatches(
    stream: Iterable[SampleAnnotation],
    superbatch_size: int,
    epoch: int = 0,
    *,
    shuffle_buffer: int = 0,
    seed: int = 0,
) -> Iterator[Superbatch]:
    """Chunk a stream into consecutive superbatches; the tail may be short.

    Ordinals refer to positions in the raw (pre-shuffle) stream so they
    remain stable sample identifiers. The shuffle, when enabled, is fully
    determined by (seed, epoch).
    """
    indexed = enumerate(stream)
    if shuffle_buffer > 1:
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, epoch])
        indexed = buffered_shuffle(indexed, shuffle_buffer, rng)
    samples: list[SampleAnnotation] = []
    origins: list[int] = []
    for ordinal, sample in indexed:
        samples.append(sample)
        origins.append(ordinal)
        if len(samples) == superbatch_size:
            yield Superbatch(samples, origins, epoch)
            samples, origins = [], []
    if samples:
        yield Superbatch(samples, origins, epoch)


def format_batch_line(batch: SelectedBatch) -> str:
    return f"{batch.epoch}\t{batch.batch_seq}\t{batch.strategy}\t" + ",".join(
        str(i) for i in batch.indices
    )


def parse_batch_line(line: str) -> SelectedBatch:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        raise SamplerError(f"malformed batch line: {line!r}")
    epoch, seq, strategy, idx = parts
    indices = tuple(int(i) for i in idx.split(",")) if idx else ()
    return SelectedBatch(int(epoch), int(seq), indices, strategy)


def format_header(config: SamplerConfig) -> str:
    return (
        f"{WIRE_HEADER_PREFIX} B={config.superbatch_size} "
        f"f={config.filter_ratio!r} seed={config.seed}"
    )


class BatchWriter:
    """Single-writer sink appending the line-based wire format.

    Writes the header up front, one line per batch afterwards, and flushes
    whenever the epoch advances (and on close).
    """

    def __init__(self, target: str | Path | IO[str], config: SamplerConfig):
        if hasattr(target, "write"):
            self._fh: IO[str] = target  # type: ignore[assignment]
            self._owned = False
        else:
            self._fh = open(target, "w", encoding="utf-8")
            self._owned = True
        self._epoch: int | None = None
        self._fh.write(format_header(config) + "\n")

    def write(self, batch: SelectedBatch) -> None:
        if self._epoch is not None and batch.epoch != self._epoch:
            self._fh.flush()
        self._epoch = batch.epoch
        self._fh.write(format_batch_line(batch) + "\n")

    def flush(self) -> None:
        self._fh.flush()

    def close(self) -> None:
        self._fh.flush()
        if self._owned:
            self._fh.close()

    def __enter__(self) -> "BatchWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_batches(path: str | Path) -> tuple[dict, list[SelectedBatch]]:
    """Parse a batch-index file; returns (header metadata, batches)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(WIRE_HEADER_PREFIX):
            raise SamplerError(f"{path}: missing '{WIRE_HEADER_PREFIX}' header")
        meta: dict = {}
        for token in header[len(WIRE_HEADER_PREFIX):].split():
            key, _, value = token.partition("=")
            meta[key] = value
        batches = [parse_batch_line(line) for line in fh if line.strip()]
    return meta, batches


def emit_batch(batch: SelectedBatch, sink) -> None:
    """Append one batch record to the sink (anything with ``write(batch)``)."""
    sink.write(batch)


@dataclass
class RunSummary:
    superbatches: int = 0
    samples_selected: int = 0
    samples_seen: int = 0
    wall_time_s: float = 0.0
    samples_per_epoch: list[int] = field(default_factory=list)


def _epoch_stream(
    stream, epoch: int
) -> Iterable[SampleAnnotation]:
    if callable(stream):
        return stream()
    if isinstance(stream, (list, tuple)):
        return stream
    if epoch > 0:
        raise SamplerError(
            "multi-epoch runs need a re-iterable stream (sequence or factory callable)"
        )
    return stream


def run_sampler(
    stream: Iterable[SampleAnnotation] | Callable[[], Iterable[SampleAnnotation]],
    config: SamplerConfig,
    strategy: ScoringStrategy,
    sink,
) -> RunSummary:
    """Drive the full superbatch -> score -> top-k -> emit pipeline.

    Emits one SelectedBatch per superbatch per epoch, carrying origin
    ordinals in selection order. Deterministic given (stream bytes,
    config, strategy): any shuffling derives from (seed, epoch) alone.
    """
    summary = RunSummary()
    started = time.perf_counter()
    keep_fraction = 1.0 - config.filter_ratio
    for epoch in range(config.epochs):
        epoch_selected = 0
        seq = 0
        for superbatch in iter_superbatches(
            _epoch_stream(stream, epoch),
            config.superbatch_size,
            epoch,
            shuffle_buffer=config.shuffle_buffer,
            seed=config.seed,
        ):
            b = round_half_up(keep_fraction * len(superbatch))
            if strategy.stateful:
                positions = strategy.select(superbatch, b)
            else:
                scores = [strategy.score(s, superbatch) for s in superbatch.samples]
                positions = select_topk(scores, b)
            ordinals = tuple(superbatch.origin_indices[p] for p in positions)
            batch = SelectedBatch(epoch, seq, ordinals, strategy.name)
            try:
                emit_batch(batch, sink)
            except SamplerError:
                raise
            except Exception as exc:
                raise SinkError(
                    f"sink write failed: {exc}", summary.superbatches, summary.samples_selected
                ) from exc
            summary.superbatches += 1
            summary.samples_selected += len(ordinals)
            summary.samples_seen += len(superbatch)
            epoch_selected += len(ordinals)
            seq += 1
        if seq == 0:
            raise SamplerError("empty annotation stream")
        summary.samples_per_epoch.append(epoch_selected)
    summary.wall_time_s = time.perf_counter() - started
    return summary
