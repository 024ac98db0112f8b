#!/usr/bin/env node
/**
 * cabs-client: consume engine batch-index streams and analytics reports.
 *
 *   cabs-client info <stream.batches>
 *       Validate a batch-index file strictly and print its metadata.
 *
 *   cabs-client plot --out fig.svg [name=]report.csv [[name=]report.csv ...]
 *       Render composition curves / multiplicity histograms (.svg or .png).
 */
import { BatchStream } from './batches.js';
import { plotComposition, type ReportRef } from './plot.js';

function fail(message: string): never {
  process.stderr.write(`cabs-client: ${message}\n`);
  process.exit(2);
}

function cmdInfo(args: string[]): void {
  const path = args[0];
  if (!path || args.length !== 1) fail('usage: info <stream.batches>');
  const stream = BatchStream.fromFile(path);
  const { superbatchSize, filterRatio, seed } = stream.header;
  process.stdout.write(`superbatch_size=${superbatchSize} filter_ratio=${filterRatio} seed=${seed}\n`);
  process.stdout.write(`batches=${stream.batches.length} indices=${stream.totalIndices()}\n`);
  for (const [epoch, total] of stream.indicesPerEpoch()) {
    process.stdout.write(`epoch ${epoch}: ${total} indices\n`);
  }
}

function cmdPlot(args: string[]): void {
  let out: string | undefined;
  const reports: ReportRef[] = [];
  for (let i = 0; i < args.length; i++) {
    const arg = args[i] as string;
    if (arg === '--out') {
      out = args[++i];
      if (!out) fail('--out needs a path');
    } else {
      const eq = arg.indexOf('=');
      if (eq > 0 && !arg.slice(0, eq).includes('/')) {
        reports.push({ name: arg.slice(0, eq), path: arg.slice(eq + 1) });
      } else {
        reports.push({ path: arg });
      }
    }
  }
  if (!out) fail('plot requires --out <figure.svg|figure.png>');
  if (reports.length === 0) fail('plot requires at least one report file');
  for (const path of plotComposition(reports, out)) {
    process.stdout.write(`wrote ${path}\n`);
  }
}

function main(): void {
  const [command, ...rest] = process.argv.slice(2);
  try {
    switch (command) {
      case 'info':
        cmdInfo(rest);
        break;
      case 'plot':
        cmdPlot(rest);
        break;
      default:
        fail("expected a command: 'info' or 'plot'");
    }
  } catch (err) {
    fail(err instanceof Error ? err.message : String(err));
  }
}

main();
