/**
 * Strict reader for the engine's batch-index wire format.
 *
 * Index streams feed a training loop, so nothing is skipped silently:
 * a missing or mangled header is fatal, and any malformed body line is
 * fatal with its line number. Accepted streams re-serialize
 * byte-identically.
 */
import { readFileSync } from 'node:fs';

export const HEADER_PREFIX = '#cabs-batches v1';

export interface SelectedBatch {
  epoch: number;
  batchSeq: number;
  strategy: string;
  indices: number[];
}

export interface StreamHeader {
  superbatchSize: number;
  filterRatio: number;
  seed: number;
  /** Verbatim header line, kept for byte-exact re-serialization. */
  raw: string;
}

export class BatchFormatError extends Error {
  constructor(message: string, public readonly lineNo: number) {
    super(`line ${lineNo}: ${message}`);
    this.name = 'BatchFormatError';
  }
}

const INT = /^(0|[1-9][0-9]*)$/;
const HEADER = /^#cabs-batches v1 B=(0|[1-9][0-9]*) f=([0-9.eE+-]+) seed=(-?(?:0|[1-9][0-9]*))$/;

export function parseHeader(line: string): StreamHeader {
  const match = HEADER.exec(line);
  if (!match) {
    throw new BatchFormatError(`expected '${HEADER_PREFIX} B=<B> f=<f> seed=<seed>' header`, 1);
  }
  const filterRatio = Number(match[2]);
  if (!Number.isFinite(filterRatio)) {
    throw new BatchFormatError(`unparseable filter ratio '${match[2]}'`, 1);
  }
  return {
    superbatchSize: Number(match[1]),
    filterRatio,
    seed: Number(match[3]),
    raw: line,
  };
}

function parseIndex(field: string, lineNo: number): number {
  if (!INT.test(field)) {
    throw new BatchFormatError(`bad ordinal '${field}'`, lineNo);
  }
  return Number(field);
}

export function parseBatchLine(line: string, lineNo: number): SelectedBatch {
  const parts = line.split('\t');
  if (parts.length !== 4) {
    throw new BatchFormatError(`expected 4 tab-separated fields, got ${parts.length}`, lineNo);
  }
  const [epoch, seq, strategy, joined] = parts as [string, string, string, string];
  if (!INT.test(epoch) || !INT.test(seq)) {
    throw new BatchFormatError(`bad epoch/batch_seq '${epoch}'/'${seq}'`, lineNo);
  }
  if (strategy.length === 0) {
    throw new BatchFormatError('empty strategy name', lineNo);
  }
  const indices = joined === '' ? [] : joined.split(',').map((f) => parseIndex(f, lineNo));
  return { epoch: Number(epoch), batchSeq: Number(seq), strategy, indices };
}

export class BatchStream {
  private constructor(
    public readonly header: StreamHeader,
    public readonly batches: readonly SelectedBatch[],
  ) {}

  static fromText(text: string): BatchStream {
    if (!text.endsWith('\n')) {
      // likely a torn write; rejecting keeps re-serialization byte-exact
      throw new BatchFormatError('stream does not end in a newline', text.split('\n').length);
    }
    const lines = text.split('\n');
    lines.pop(); // the empty chunk after the final newline
    if (lines.length === 0 || lines[0] === undefined) {
      throw new BatchFormatError('empty stream', 1);
    }
    const header = parseHeader(lines[0]);
    const batches: SelectedBatch[] = [];
    let prev: [number, number] | null = null;
    for (let i = 1; i < lines.length; i++) {
      const batch = parseBatchLine(lines[i] as string, i + 1);
      if (prev !== null) {
        const pe: number = prev[0];
        const ps: number = prev[1];
        if (batch.epoch < pe || (batch.epoch === pe && batch.batchSeq <= ps)) {
          throw new BatchFormatError(
            `batches out of (epoch, batch_seq) order: (${batch.epoch}, ${batch.batchSeq}) after (${pe}, ${ps})`,
            i + 1,
          );
        }
      }
      prev = [batch.epoch, batch.batchSeq];
      batches.push(batch);
    }
    return new BatchStream(header, batches);
  }

  static fromFile(path: string): BatchStream {
    return BatchStream.fromText(readFileSync(path, 'utf-8'));
  }

  [Symbol.iterator](): Iterator<SelectedBatch> {
    return this.batches[Symbol.iterator]();
  }

  /** Total parsed indices per epoch, for cross-checking engine manifests. */
  indicesPerEpoch(): Map<number, number> {
    const totals = new Map<number, number>();
    for (const batch of this.batches) {
      totals.set(batch.epoch, (totals.get(batch.epoch) ?? 0) + batch.indices.length);
    }
    return totals;
  }

  totalIndices(): number {
    let total = 0;
    for (const batch of this.batches) total += batch.indices.length;
    return total;
  }

  /** Byte-identical rendering of the accepted stream. */
  serialize(): string {
    const lines = [this.header.raw];
    for (const b of this.batches) {
      lines.push(`${b.epoch}\t${b.batchSeq}\t${b.strategy}\t${b.indices.join(',')}`);
    }
    return lines.join('\n') + '\n';
  }
}

export function* iterateBatches(source: string): Generator<SelectedBatch> {
  yield* BatchStream.fromText(source).batches;
}
