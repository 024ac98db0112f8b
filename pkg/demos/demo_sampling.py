"""Walk through online sub-batch selection on a long-tailed synthetic pool.

Builds a 20k-sample pool over 500 concepts, runs the three selection
strategies over the same superbatches and compares what lands in the
sub-batches: unique concepts, histogram entropy, per-sample multiplicity.
"""
import numpy as np

from cabs.analytics import batch_composition
from cabs.sampler import SamplerConfig, Superbatch, iter_superbatches, round_half_up, select_topk
from cabs.strategies import DmParams, dm_select, fm_score, iid_score
from cabs.synth import zipf_pool

POOL_SIZE = 20_000
N_CONCEPTS = 500
SUPERBATCH = 4_096
FILTER_RATIO = 0.75

pool = zipf_pool(POOL_SIZE, N_CONCEPTS, seed=0)
print(f"pool: {POOL_SIZE} samples, {N_CONCEPTS} concepts")
print(f"median instances per sample: {np.median([len(s.concepts) for s in pool]):.0f}")
print(f"superbatch B={SUPERBATCH}, filter ratio f={FILTER_RATIO} "
      f"-> sub-batch b={round_half_up((1 - FILTER_RATIO) * SUPERBATCH)}\n")

params = DmParams(max_concept_frequency=40, min_samples_concept=1)
rows = {"iid": [], "dm": [], "fm": []}

for sb in iter_superbatches(pool, SUPERBATCH, epoch=0):
    b = round_half_up((1 - FILTER_RATIO) * len(sb))
    picks = {
        "iid": select_topk([iid_score(s) for s in sb.samples], b),
        "fm": select_topk([float(fm_score(s)) for s in sb.samples], b),
        "dm": dm_select(sb, b, params).positions,
    }
    for name, positions in picks.items():
        samples = [sb.samples[p] for p in positions]
        comp = batch_composition(samples)
        mean_mult = np.mean([len(s.concepts) for s in samples])
        rows[name].append((comp.unique_concepts, comp.entropy, comp.max_frequency, mean_mult))

print(f"{'strategy':>8} | {'unique':>7} | {'entropy':>7} | {'max freq':>8} | {'mean #inst':>10}")
print("-" * 55)
for name in ("iid", "dm", "fm"):
    unique, entropy, top, mult = np.mean(rows[name], axis=0)
    print(f"{name:>8} | {unique:7.0f} | {entropy:7.3f} | {top:8.0f} | {mult:10.2f}")

print("""
Reading the table:
  - the diversity maximizer covers far more concepts per sub-batch and
    flattens the histogram (higher entropy, lower max frequency);
  - the frequency maximizer instead packs object-dense samples (highest
    mean instance count), trading concept balance for scene complexity;
  - constant scoring reproduces the superbatch head, i.e. the raw
    long-tailed stream.""")
