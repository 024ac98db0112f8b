import { mkdtempSync, readFileSync, statSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { inflateSync } from 'node:zlib';

import { describe, expect, it } from 'vitest';

import { plotComposition } from '../src/plot.js';
import { readReport, support } from '../src/reports.js';

const FIXTURES = join(__dirname, 'fixtures');

function outDir(): string {
  return mkdtempSync(join(tmpdir(), 'cabs-client-'));
}

function freq(name: string) {
  const report = readReport(join(FIXTURES, `${name}.composition.csv`), name);
  if (report.kind !== 'frequency') throw new Error('expected a frequency report');
  return report.series;
}

describe('composition reports', () => {
  it('reads csv and json variants consistently', () => {
    const csv = freq('dm');
    const json = readReport(join(FIXTURES, 'dm.composition.json'));
    expect(json.kind).toBe('frequency');
    if (json.kind === 'frequency') {
      expect(json.series.counts).toEqual(csv.counts);
      expect(json.series.name).toBe('dm'); // strategy recorded by the engine
    }
  });

  it('shows the diversity-maximized curve with at least the iid support', () => {
    expect(support(freq('dm'))).toBeGreaterThanOrEqual(support(freq('iid')));
  });

  it('reads the multiplicity histogram', () => {
    const report = readReport(join(FIXTURES, 'multiplicity.csv'));
    expect(report.kind).toBe('multiplicity');
    if (report.kind === 'multiplicity') {
      expect(report.series.bins.size).toBeGreaterThan(0);
    }
  });
});

describe('figure rendering', () => {
  const dmIid = [
    { name: 'dm', path: join(FIXTURES, 'dm.composition.csv') },
    { name: 'iid', path: join(FIXTURES, 'iid.composition.csv') },
  ];

  it('writes a non-empty svg with one curve per strategy', () => {
    const out = join(outDir(), 'composition.svg');
    const written = plotComposition(dmIid, out);
    expect(written).toEqual([out]);
    const svg = readFileSync(out, 'utf-8');
    expect(svg.length).toBeGreaterThan(0);
    expect(svg).toContain('<svg');
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect(svg).toContain('>dm</text>');
    expect(svg).toContain('>iid</text>');
  });

  it('writes a structurally valid non-empty png', () => {
    const out = join(outDir(), 'composition.png');
    plotComposition(dmIid, out);
    const png = readFileSync(out);
    expect(png.length).toBeGreaterThan(0);
    expect([...png.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    expect(png.subarray(12, 16).toString('latin1')).toBe('IHDR');
    expect(png.readUInt32BE(16)).toBe(640); // width
    expect(png.readUInt32BE(20)).toBe(400); // height
    const idatLen = png.readUInt32BE(33);
    expect(png.subarray(37, 41).toString('latin1')).toBe('IDAT');
    const raw = inflateSync(png.subarray(41, 41 + idatLen));
    expect(raw.length).toBe(400 * (1 + 640 * 4));
  });

  it('renders the multiplicity histogram', () => {
    const out = join(outDir(), 'multiplicity.svg');
    plotComposition([{ path: join(FIXTURES, 'multiplicity.csv') }], out);
    const svg = readFileSync(out, 'utf-8');
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThan(2);
  });

  it('splits mixed report kinds into two figure files', () => {
    const dir = outDir();
    const written = plotComposition(
      [...dmIid, { path: join(FIXTURES, 'multiplicity.csv') }],
      join(dir, 'fig.svg'),
    );
    expect(written).toEqual([join(dir, 'fig-frequency.svg'), join(dir, 'fig-multiplicity.svg')]);
    for (const path of written) {
      expect(statSync(path).size).toBeGreaterThan(0);
    }
  });

  it('rejects unknown extensions', () => {
    expect(() => plotComposition(dmIid, join(outDir(), 'fig.pdf'))).toThrow(/extension/);
  });

  it('rejects empty report sets', () => {
    expect(() => plotComposition([], join(outDir(), 'fig.svg'))).toThrow(/no reports/);
  });
});
