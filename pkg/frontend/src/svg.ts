/** Serialize a figure to standalone SVG markup. */
import type { Figure, Primitive, Rgb } from './figure.js';

function css([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}

function escapeText(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function element(p: Primitive): string {
  switch (p.type) {
    case 'rect': {
      const paint = p.fill ? `fill="${css(p.color)}"` : `fill="none" stroke="${css(p.color)}"`;
      return `<rect x="${p.x}" y="${p.y}" width="${p.w}" height="${p.h}" ${paint}/>`;
    }
    case 'line':
      return `<line x1="${p.x1}" y1="${p.y1}" x2="${p.x2}" y2="${p.y2}" stroke="${css(p.color)}"/>`;
    case 'polyline': {
      const points = p.points.map(([x, y]) => `${round(x)},${round(y)}`).join(' ');
      return `<polyline points="${points}" fill="none" stroke="${css(p.color)}" stroke-width="1.5"/>`;
    }
    case 'text':
      return (
        `<text x="${p.x}" y="${p.y}" font-family="sans-serif" font-size="${p.size}" ` +
        `fill="${css(p.color)}">${escapeText(p.text)}</text>`
      );
  }
}

function round(v: number): number {
  return Math.round(v * 100) / 100;
}

export function renderSvg(figure: Figure): string {
  const body = figure.primitives.map(element).join('\n  ');
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${figure.width}" height="${figure.height}" ` +
    `viewBox="0 0 ${figure.width} ${figure.height}">\n` +
    `  <rect width="${figure.width}" height="${figure.height}" fill="white"/>\n` +
    `  ${body}\n</svg>\n`
  );
}
