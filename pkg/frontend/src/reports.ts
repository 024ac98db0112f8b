/**
 * Readers for the engine's analytics reports: concept-frequency
 * histograms (composition CSV/JSON) and per-sample multiplicity
 * histograms (profile CSV/JSON).
 */
import { readFileSync } from 'node:fs';
import { basename } from 'node:path';

export interface FrequencySeries {
  name: string;
  /** Concept counts sorted descending: the curve as plotted. */
  counts: number[];
}

export interface MultiplicitySeries {
  name: string;
  /** instances-per-sample -> number of samples */
  bins: Map<number, number>;
}

export type Report =
  | { kind: 'frequency'; series: FrequencySeries }
  | { kind: 'multiplicity'; series: MultiplicitySeries };

function splitCsvLine(line: string): string[] {
  const fields: string[] = [];
  let current = '';
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        current += '"';
        i++;
      } else if (ch === '"') {
        quoted = false;
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ',') {
      fields.push(current);
      current = '';
    } else {
      current += ch;
    }
  }
  fields.push(current);
  return fields;
}

function csvRows(text: string): string[][] {
  return text
    .split('\n')
    .filter((line) => line.length > 0)
    .map(splitCsvLine);
}

function defaultName(path: string): string {
  return basename(path).replace(/\..*$/, '');
}

export function readReport(path: string, name?: string): Report {
  const label = name ?? defaultName(path);
  const text = readFileSync(path, 'utf-8');
  if (path.endsWith('.json')) {
    return fromJson(JSON.parse(text), label);
  }
  const rows = csvRows(text);
  const header = rows.shift();
  if (!header) {
    throw new Error(`${path}: empty report`);
  }
  if (header[0] === 'concept' && header[1] === 'count') {
    const counts = rows.map((r) => Number(r[1]));
    return { kind: 'frequency', series: { name: label, counts: sortDesc(counts) } };
  }
  if (header[0] === 'multiplicity' && header[1] === 'samples') {
    const bins = new Map<number, number>();
    for (const r of rows) bins.set(Number(r[0]), Number(r[1]));
    return { kind: 'multiplicity', series: { name: label, bins } };
  }
  throw new Error(`${path}: unrecognized CSV header '${header.join(',')}'`);
}

interface CompositionJson {
  aggregate?: { concept_histogram?: Record<string, number> };
  per_sample_multiplicity?: Record<string, number>;
  strategy?: string | null;
}

function fromJson(doc: CompositionJson, label: string): Report {
  if (doc.aggregate?.concept_histogram) {
    const counts = Object.values(doc.aggregate.concept_histogram);
    const name = doc.strategy ?? label;
    return { kind: 'frequency', series: { name, counts: sortDesc(counts) } };
  }
  if (doc.per_sample_multiplicity) {
    const bins = new Map<number, number>();
    for (const [k, v] of Object.entries(doc.per_sample_multiplicity)) {
      bins.set(Number(k), v);
    }
    return { kind: 'multiplicity', series: { name: label, bins } };
  }
  throw new Error(`${label}: JSON report carries neither a composition nor a multiplicity histogram`);
}

function sortDesc(values: number[]): number[] {
  return [...values].sort((a, b) => b - a);
}

/** Number of concepts with a nonzero count, i.e. the curve's support. */
export function support(series: FrequencySeries): number {
  return series.counts.filter((c) => c > 0).length;
}
