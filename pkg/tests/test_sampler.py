import io

import pytest
from hypothesis import given, strategies as st

from cabs.sampler import (
    BatchWriter,
    SamplerConfig,
    SamplerError,
    SelectedBatch,
    SinkError,
    format_batch_line,
    iter_superbatches,
    parse_batch_line,
    read_batches,
    round_half_up,
    run_sampler,
    select_topk,
)
from cabs.strategies import IidStrategy

from conftest import make_samples


def topk_oracle(scores, k):
    """Full sort on (-score, index), then truncate."""
    return [i for i in sorted(range(len(scores)), key=lambda i: (-scores[i], i))][:k]


class TestSelectTopk:
    def test_basic(self):
        assert select_topk([0.1, 0.9, 0.5], 2) == [1, 2]

    def test_constant_scores_reproduce_input_order(self):
        assert select_topk([1.0] * 5, 3) == [0, 1, 2]

    def test_k_equals_length(self):
        assert select_topk([0.3, 0.7, 0.7, 0.1], 4) == [1, 2, 0, 3]

    def test_k_too_large_is_fatal(self):
        with pytest.raises(SamplerError):
            select_topk([1.0, 2.0], 3)

    def test_nan_score_is_fatal(self):
        with pytest.raises(SamplerError, match="NaN"):
            select_topk([0.1, float("nan")], 1)

    @given(
        st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32), min_size=1, max_size=1000),
        st.data(),
    )
    def test_matches_sort_oracle(self, scores, data):
        k = data.draw(st.integers(0, len(scores)))
        assert select_topk(scores, k) == topk_oracle(scores, k)


class TestConfig:
    def test_sub_batch_size_derivation(self):
        assert SamplerConfig(20480, 0.8).sub_batch_size == 4096
        assert SamplerConfig(10, 0.0).sub_batch_size == 10

    def test_round_half_up(self):
        assert round_half_up(2.5) == 3
        assert round_half_up(2.4) == 2
        assert round_half_up(1.0) == 1

    def test_invalid_filter_ratio(self):
        with pytest.raises(SamplerError):
            SamplerConfig(10, 1.0)

    def test_zero_sub_batch_rejected(self):
        with pytest.raises(SamplerError, match="sub-batch"):
            SamplerConfig(2, 0.9)


class TestSuperbatches:
    def test_trailing_superbatch_is_short(self):
        samples = make_samples([[0]] * 10)
        lengths = [len(sb) for sb in iter_superbatches(samples, 4)]
        assert lengths == [4, 4, 2]

    def test_ordinals_follow_stream_positions(self):
        samples = make_samples([[0]] * 6)
        batches = list(iter_superbatches(samples, 4))
        assert batches[0].origin_indices == [0, 1, 2, 3]
        assert batches[1].origin_indices == [4, 5]

    def test_shuffle_is_seeded_and_preserves_ordinals(self):
        samples = make_samples([[0]] * 50
        )
        a = [tuple(sb.origin_indices) for sb in iter_superbatches(samples, 10, 0, shuffle_buffer=16, seed=7)]
        b = [tuple(sb.origin_indices) for sb in iter_superbatches(samples, 10, 0, shuffle_buffer=16, seed=7)]
        c = [tuple(sb.origin_indices) for sb in iter_superbatches(samples, 10, 1, shuffle_buffer=16, seed=7)]
        assert a == b
        assert a != c
        seen = sorted(i for sb in iter_superbatches(samples, 10, 0, shuffle_buffer=16, seed=7) for i in sb.origin_indices)
        assert seen == list(range(50))


class ListSink:
    def __init__(self):
        self.batches = []

    def write(self, batch):
        self.batches.append(batch)


class FailingSink:
    def write(self, batch):
        raise IOError("disk full")


class TestRunSampler:
    def test_zero_filter_keeps_everything(self):
        samples = make_samples([[i % 3] for i in range(8)])
        sink = ListSink()
        run_sampler(samples, SamplerConfig(4, 0.0), IidStrategy(), sink)
        assert [b.indices for b in sink.batches] == [(0, 1, 2, 3), (4, 5, 6, 7)]

    def test_trailing_superbatch_yields_rounded_subbatch(self):
        # 10 samples, B=4, f=0.5 -> sub-batches of sizes 2, 2, 1
        samples = make_samples([[0]] * 10)
        sink = ListSink()
        summary = run_sampler(samples, SamplerConfig(4, 0.5), IidStrategy(), sink)
        assert [len(b.indices) for b in sink.batches] == [2, 2, 1]
        assert summary.samples_selected == 5
        assert summary.samples_per_epoch == [5]

    def test_constant_strategy_takes_superbatch_head(self):
        samples = make_samples([[i % 5] for i in range(40)])
        sink = ListSink()
        run_sampler(samples, SamplerConfig(8, 0.75), IidStrategy(), sink)
        for seq, batch in enumerate(sink.batches):
            assert batch.indices == tuple(range(seq * 8, seq * 8 + 2))

    def test_multi_epoch_requires_reiterable(self):
        samples = iter(make_samples([[0]] * 4))
        with pytest.raises(SamplerError, match="re-iterable"):
            run_sampler(samples, SamplerConfig(2, 0.0, epochs=2), IidStrategy(), ListSink())

    def test_epochs_emit_independent_batches(self):
        samples = make_samples([[0]] * 6)
        sink = ListSink()
        summary = run_sampler(samples, SamplerConfig(3, 0.0, epochs=2), IidStrategy(), sink)
        assert [(b.epoch, b.batch_seq) for b in sink.batches] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert summary.samples_per_epoch == [6, 6]

    def test_empty_stream_is_error(self):
        with pytest.raises(SamplerError, match="empty"):
            run_sampler([], SamplerConfig(4, 0.0), IidStrategy(), ListSink())

    def test_sink_failure_reports_progress(self):
        samples = make_samples([[0]] * 4)
        with pytest.raises(SinkError, match="progress"):
            run_sampler(samples, SamplerConfig(2, 0.0), IidStrategy(), FailingSink())

    def test_summary_accounting(self):
        samples = make_samples([[0]] * 23)
        sink = ListSink()
        summary = run_sampler(samples, SamplerConfig(10, 0.4), IidStrategy(), sink)
        assert summary.samples_selected == sum(len(b.indices) for b in sink.batches)
        assert summary.superbatches == 3
        assert summary.samples_seen == 23


class TestWireFormat:
    def test_line_format(self):
        batch = SelectedBatch(0, 0, (3, 1, 2), "dm")
        assert format_batch_line(batch) == "0\t0\tdm\t3,1,2"

    def test_round_trip(self):
        batch = SelectedBatch(2, 17, (5, 0, 9), "fm")
        assert parse_batch_line(format_batch_line(batch)) == batch

    def test_empty_index_list_round_trips(self):
        batch = SelectedBatch(1, 0, (), "dm")
        assert parse_batch_line(format_batch_line(batch)) == batch

    def test_writer_appends_in_emit_order(self, tmp_path):
        config = SamplerConfig(4, 0.5, seed=11)
        buf = io.StringIO()
        writer = BatchWriter(buf, config)
        writer.write(SelectedBatch(0, 0, (0, 1), "iid"))
        writer.write(SelectedBatch(0, 1, (4, 5), "iid"))
        writer.close()
        lines = buf.getvalue().splitlines()
        assert lines == [
            "#cabs-batches v1 B=4 f=0.5 seed=11",
            "0\t0\tiid\t0,1",
            "0\t1\tiid\t4,5",
        ]

    def test_read_batches_parses_header(self, tmp_path):
        path = tmp_path / "out.batches"
        config = SamplerConfig(4, 0.25, seed=3)
        with BatchWriter(path, config) as writer:
            writer.write(SelectedBatch(0, 0, (2, 0, 1), "dm"))
        meta, batches = read_batches(path)
        assert meta == {"B": "4", "f": "0.25", "seed": "3"}
        assert batches == [SelectedBatch(0, 0, (2, 0, 1), "dm")]

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "bad.batches"
        path.write_text("0\t0\tdm\t1,2\n")
        with pytest.raises(SamplerError, match="header"):
            read_batches(path)

    def test_determinism_byte_identical(self, tmp_path):
        samples = make_samples([[i % 4, (i * 7) % 4] for i in range(37)])
        outputs = []
        for name in ("a.batches", "b.batches"):
            path = tmp_path / name
            config = SamplerConfig(8, 0.5, seed=5)
            with BatchWriter(path, config) as writer:
                run_sampler(samples, config, IidStrategy(), writer)
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]
