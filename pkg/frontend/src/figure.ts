/**
 * Backend-neutral figure model: plot layout is computed once into a
 * small set of primitives which either the SVG writer or the PNG
 * rasterizer consumes.
 */
import type { FrequencySeries, MultiplicitySeries } from './reports.js';

export type Rgb = [number, number, number];

export type Primitive =
  | { type: 'rect'; x: number; y: number; w: number; h: number; color: Rgb; fill: boolean }
  | { type: 'line'; x1: number; y1: number; x2: number; y2: number; color: Rgb }
  | { type: 'polyline'; points: [number, number][]; color: Rgb }
  | { type: 'text'; x: number; y: number; text: string; color: Rgb; size: number };

export interface Figure {
  width: number;
  height: number;
  primitives: Primitive[];
}

export const PALETTE: Rgb[] = [
  [14, 135, 67],   // green
  [255, 127, 14],  // orange
  [31, 119, 180],  // blue
  [148, 103, 189], // purple
  [140, 86, 75],   // brown
];

const AXIS: Rgb = [60, 60, 60];
const WIDTH = 640;
const HEIGHT = 400;
const MARGIN = { left: 60, right: 16, top: 28, bottom: 44 };

function plotArea() {
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    w: WIDTH - MARGIN.left - MARGIN.right,
    h: HEIGHT - MARGIN.top - MARGIN.bottom,
  };
}

function axes(title: string, xLabel: string, yLabel: string): Primitive[] {
  const a = plotArea();
  return [
    { type: 'line', x1: a.x0, y1: a.y0 + a.h, x2: a.x0 + a.w, y2: a.y0 + a.h, color: AXIS },
    { type: 'line', x1: a.x0, y1: a.y0, x2: a.x0, y2: a.y0 + a.h, color: AXIS },
    { type: 'text', x: a.x0, y: MARGIN.top - 10, text: title, color: AXIS, size: 14 },
    { type: 'text', x: a.x0 + a.w / 2 - 40, y: HEIGHT - 12, text: xLabel, color: AXIS, size: 12 },
    { type: 'text', x: 8, y: a.y0 + 12, text: yLabel, color: AXIS, size: 12 },
  ];
}

function legend(names: string[], primitives: Primitive[]): void {
  const a = plotArea();
  names.forEach((name, i) => {
    const color = PALETTE[i % PALETTE.length] as Rgb;
    const y = a.y0 + 10 + 18 * i;
    const x = a.x0 + a.w - 150;
    primitives.push({ type: 'rect', x, y, w: 12, h: 12, color, fill: true });
    primitives.push({ type: 'text', x: x + 18, y: y + 11, text: name, color: AXIS, size: 12 });
  });
}

/** Sorted concept-frequency curves for several strategies on one axis. */
export function frequencyFigure(series: FrequencySeries[]): Figure {
  const a = plotArea();
  const maxRank = Math.max(1, ...series.map((s) => s.counts.length));
  const maxCount = Math.max(1, ...series.map((s) => s.counts[0] ?? 0));
  const primitives = axes('sub-batch concept frequencies (sorted)', 'concept rank', 'count');
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length] as Rgb;
    const points: [number, number][] = s.counts.map((count, rank) => [
      a.x0 + ((rank + 1) / maxRank) * a.w,
      a.y0 + a.h - (count / maxCount) * a.h,
    ]);
    if (points.length === 1) {
      points.unshift([a.x0, points[0]![1]]);
    }
    primitives.push({ type: 'polyline', points, color });
  });
  legend(series.map((s) => s.name), primitives);
  const ticks: Primitive[] = [
    { type: 'text', x: a.x0 - 8, y: a.y0 + a.h + 16, text: '0', color: AXIS, size: 10 },
    { type: 'text', x: a.x0 + a.w - 24, y: a.y0 + a.h + 16, text: String(maxRank), color: AXIS, size: 10 },
    { type: 'text', x: 18, y: a.y0 + a.h, text: '0', color: AXIS, size: 10 },
    { type: 'text', x: 18, y: a.y0 + 6, text: String(maxCount), color: AXIS, size: 10 },
  ];
  primitives.push(...ticks);
  return { width: WIDTH, height: HEIGHT, primitives };
}

/** Side-by-side bars of the per-sample multiplicity histograms. */
export function multiplicityFigure(series: MultiplicitySeries[]): Figure {
  const a = plotArea();
  const maxMult = Math.max(1, ...series.flatMap((s) => [...s.bins.keys()]));
  const maxSamples = Math.max(1, ...series.flatMap((s) => [...s.bins.values()]));
  const primitives = axes('instances per sample', 'instances', 'samples');
  const slot = a.w / (maxMult + 1);
  const bar = Math.max(1, (slot * 0.8) / Math.max(1, series.length));
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length] as Rgb;
    for (const [mult, count] of s.bins) {
      const h = (count / maxSamples) * a.h;
      primitives.push({
        type: 'rect',
        x: a.x0 + mult * slot + slot * 0.1 + i * bar,
        y: a.y0 + a.h - h,
        w: bar,
        h,
        color,
        fill: true,
      });
    }
  });
  legend(series.map((s) => s.name), primitives);
  primitives.push(
    { type: 'text', x: a.x0 + a.w - 24, y: a.y0 + a.h + 16, text: String(maxMult), color: AXIS, size: 10 },
    { type: 'text', x: 18, y: a.y0 + 6, text: String(maxSamples), color: AXIS, size: 10 },
  );
  return { width: WIDTH, height: HEIGHT, primitives };
}
