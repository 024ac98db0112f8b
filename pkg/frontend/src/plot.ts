/**
 * Composition plotting: consume the engine's analytics reports and emit
 * figure files (format chosen by the output extension).
 */
import { writeFileSync } from 'node:fs';

import { frequencyFigure, multiplicityFigure, type Figure } from './figure.js';
import { readReport, type FrequencySeries, type MultiplicitySeries } from './reports.js';
import { renderPng } from './png.js';
import { renderSvg } from './svg.js';

export interface ReportRef {
  path: string;
  name?: string;
}

function writeFigure(figure: Figure, out: string): void {
  if (out.endsWith('.svg')) {
    writeFileSync(out, renderSvg(figure));
  } else if (out.endsWith('.png')) {
    writeFileSync(out, renderPng(figure));
  } else {
    throw new Error(`unsupported figure extension on '${out}' (use .svg or .png)`);
  }
}

function splitExtension(out: string): [string, string] {
  const dot = out.lastIndexOf('.');
  if (dot <= 0) {
    throw new Error(`output path '${out}' needs a .svg or .png extension`);
  }
  return [out.slice(0, dot), out.slice(dot)];
}

/**
 * Render sorted concept-frequency curves (one per strategy, shared axis)
 * and/or per-sample multiplicity histograms from analytics reports.
 *
 * With reports of a single kind the figure is written to `out`; with
 * both kinds present, `-frequency` / `-multiplicity` suffixed files are
 * written instead. Returns the written paths.
 */
export function plotComposition(reports: ReportRef[], out: string): string[] {
  if (reports.length === 0) {
    throw new Error('no reports given');
  }
  const frequencies: FrequencySeries[] = [];
  const multiplicities: MultiplicitySeries[] = [];
  for (const ref of reports) {
    const report = readReport(ref.path, ref.name);
    if (report.kind === 'frequency') {
      if (report.series.counts.length === 0) {
        throw new Error(`${ref.path}: empty composition report`);
      }
      frequencies.push(report.series);
    } else {
      if (report.series.bins.size === 0) {
        throw new Error(`${ref.path}: empty multiplicity report`);
      }
      multiplicities.push(report.series);
    }
  }
  const written: string[] = [];
  const both = frequencies.length > 0 && multiplicities.length > 0;
  const [stem, ext] = splitExtension(out);
  if (frequencies.length > 0) {
    const path = both ? `${stem}-frequency${ext}` : out;
    writeFigure(frequencyFigure(frequencies), path);
    written.push(path);
  }
  if (multiplicities.length > 0) {
    const path = both ? `${stem}-multiplicity${ext}` : out;
    writeFigure(multiplicityFigure(multiplicities), path);
    written.push(path);
  }
  return written;
}
