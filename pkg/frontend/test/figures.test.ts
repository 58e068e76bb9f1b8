import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { parseCsv, SchemaMismatch } from '../src/csv.js';
import { renderFigure } from '../src/figures.js';
import { rasterizeSvg } from '../src/png.js';
import { HEIGHT, WIDTH } from '../src/svg.js';

const golden = (name: string) =>
  readFileSync(join(__dirname, '..', 'golden', name), 'utf-8');

describe('gh-convergence', () => {
  it('renders five markers and a shaded band', () => {
    const table = parseCsv(golden('collapse_ray.csv'));
    const svg = renderFigure({ kind: 'gh-convergence' }, table);
    expect(svg).toContain('<svg');
    expect(svg).toContain('polygon'); // shaded lower/upper band
    const markers = svg.match(/<circle /g) ?? [];
    expect(markers.length).toBe(10); // five upper + five lower markers
  });

  it('is byte-identical on repeated renders', () => {
    const table = parseCsv(golden('collapse_ray.csv'));
    const a = renderFigure({ kind: 'gh-convergence' }, table);
    const b = renderFigure({ kind: 'gh-convergence' }, table);
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);
  });

  it('raises SchemaMismatch on a renamed column', () => {
    const broken = golden('collapse_ray.csv').replace('gh_upper', 'gh_up');
    const table = parseCsv(broken);
    expect(() => renderFigure({ kind: 'gh-convergence' }, table)).toThrow(
      SchemaMismatch,
    );
  });

  it('renders empty axes with a warning footer for header-only input', () => {
    const table = parseCsv('i,gh_lower,gh_upper\n');
    const svg = renderFigure({ kind: 'gh-convergence' }, table);
    expect(svg).toContain('warning: no data rows');
    expect(svg).toContain('<line'); // axes are drawn
  });
});

describe('decay-fit', () => {
  it('draws the fitted line with a negative slope annotation', () => {
    const table = parseCsv(golden('decay.csv'));
    const svg = renderFigure(
      { kind: 'decay-fit', xColumn: 'eps', yColumn: 'sup_f' },
      table,
    );
    const m = svg.match(/slope (-?\d+\.\d+)/);
    expect(m).not.toBeNull();
    expect(Number(m![1])).toBeLessThan(0);
    expect(svg).toContain('r2 ');
  });

  it('is deterministic', () => {
    const table = parseCsv(golden('decay.csv'));
    const spec = { kind: 'decay-fit' as const, xColumn: 'eps', yColumn: 'sup_f' };
    expect(renderFigure(spec, table)).toEqual(renderFigure(spec, table));
  });
});

describe('exponent-fit', () => {
  it('annotates the 4/3 exponent of the golden volume data', () => {
    const table = parseCsv(golden('exponent.csv'));
    const svg = renderFigure(
      { kind: 'exponent-fit', xColumn: 'r', yColumn: 'vol' },
      table,
    );
    const m = svg.match(/exponent (-?\d+\.\d+)/);
    expect(m).not.toBeNull();
    expect(Math.abs(Number(m![1]) - 4 / 3)).toBeLessThan(0.05);
  });

  it('raises SchemaMismatch for a missing column', () => {
    const table = parseCsv(golden('exponent.csv'));
    expect(() =>
      renderFigure({ kind: 'exponent-fit', xColumn: 'nope' }, table),
    ).toThrow(SchemaMismatch);
  });
});

describe('png companion', () => {
  it('encodes a valid deterministic PNG', () => {
    const table = parseCsv(golden('collapse_ray.csv'));
    const svg = renderFigure({ kind: 'gh-convergence' }, table);
    const a = rasterizeSvg(svg, WIDTH, HEIGHT);
    const b = rasterizeSvg(svg, WIDTH, HEIGHT);
    expect(Buffer.from(a.slice(0, 8))).toEqual(
      Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]),
    );
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);
  });
});
