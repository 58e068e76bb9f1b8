/** The three figure kinds rendered from gilab CSV logs.
 *
 * gh-convergence: lower/upper GH bounds per step with a shaded band.
 * decay-fit: log sup|f| against eps^{-1/2} with the least-squares line.
 * exponent-fit: log-log scatter with the fitted slope annotated.
 */

import { Table, column, requireColumns } from './csv.js';
import { HEIGHT, MARGIN, SvgDoc, WIDTH, linearScale } from './svg.js';

export type FigureKind = 'gh-convergence' | 'decay-fit' | 'exponent-fit';

export interface FigureSpec {
  kind: FigureKind;
  title?: string;
  xlabel?: string;
  ylabel?: string;
  /** column names for exponent-fit / decay-fit inputs */
  xColumn?: string;
  yColumn?: string;
}

interface Fit {
  slope: number;
  intercept: number;
  r2: number;
}

function leastSquares(xs: number[], ys: number[]): Fit {
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - mx) ** 2;
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) ** 2;
  }
  const slope = sxx > 0 ? sxy / sxx : 0;
  const intercept = my - slope * mx;
  const r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1;
  return { slope, intercept, r2 };
}

function plotArea(): { x0: number; x1: number; y0: number; y1: number } {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

function finitePairs(xs: number[], ys: number[]): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i < xs.length; i++) {
    if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) out.push([xs[i], ys[i]]);
  }
  return out;
}

export function renderFigure(spec: FigureSpec, table: Table): string {
  switch (spec.kind) {
    case 'gh-convergence':
      return ghConvergence(spec, table);
    case 'decay-fit':
      return decayFit(spec, table);
    case 'exponent-fit':
      return exponentFit(spec, table);
  }
}

function emptyAxes(doc: SvgDoc, xlabel: string, ylabel: string): string {
  const a = plotArea();
  const xs = linearScale(0, 1, a.x0, a.x1);
  const ys = linearScale(0, 1, a.y0, a.y1);
  doc.axes(xs, ys, xlabel, ylabel);
  doc.footer('warning: no data rows in input');
  return doc.render();
}

function ghConvergence(spec: FigureSpec, table: Table): string {
  requireColumns(table, ['i', 'gh_lower', 'gh_upper']);
  const doc = new SvgDoc(spec.title ?? 'pointed GH bounds per collapse step');
  const xlabel = spec.xlabel ?? 'step i';
  const ylabel = spec.ylabel ?? 'GH distance bound';
  const ii = column(table, 'i');
  const lo = column(table, 'gh_lower');
  const hi = column(table, 'gh_upper');
  const ok = ii.map((_, k) => Number.isFinite(ii[k]) && Number.isFinite(lo[k]) && Number.isFinite(hi[k]));
  const pts = ii.filter((_, k) => ok[k]);
  if (pts.length === 0) return emptyAxes(doc, xlabel, ylabel);
  const a = plotArea();
  const his = hi.filter((_, k) => ok[k]);
  const los = lo.filter((_, k) => ok[k]);
  const xs = linearScale(Math.min(...pts), Math.max(...pts), a.x0, a.x1);
  const ys = linearScale(0, Math.max(...his) * 1.1, a.y0, a.y1);
  doc.axes(xs, ys, xlabel, ylabel);
  const band: Array<[number, number]> = [];
  pts.forEach((x, k) => band.push([xs(x), ys(his[k])]));
  for (let k = pts.length - 1; k >= 0; k--) band.push([xs(pts[k]), ys(los[k])]);
  doc.polygon(band, '#4477aa', 0.18);
  doc.polyline(pts.map((x, k) => [xs(x), ys(his[k])]), '#4477aa', 1.8);
  doc.polyline(pts.map((x, k) => [xs(x), ys(los[k])]), '#aa5533', 1.8, '5,3');
  pts.forEach((x, k) => {
    doc.circle(xs(x), ys(his[k]), 3.4, '#4477aa');
    doc.circle(xs(x), ys(los[k]), 3.0, '#aa5533');
  });
  doc.text(a.x1 - 6, a.y1 + 12, 'upper', 11, 'end', '#4477aa');
  doc.text(a.x1 - 6, a.y1 + 26, 'lower', 11, 'end', '#aa5533');
  return doc.render();
}

function decayFit(spec: FigureSpec, table: Table): string {
  const xcol = spec.xColumn ?? 'eps';
  const ycol = spec.yColumn ?? 'sup_f';
  requireColumns(table, [xcol, ycol]);
  const doc = new SvgDoc(spec.title ?? 'gluing error decay');
  const xlabel = spec.xlabel ?? 'eps^{-1/2}';
  const ylabel = spec.ylabel ?? 'log sup |f|';
  const eps = column(table, xcol);
  const sup = column(table, ycol);
  const data = finitePairs(eps, sup).filter(([e, s]) => e > 0 && s > 0);
  if (data.length === 0) return emptyAxes(doc, xlabel, ylabel);
  const pts = data.map(([e, s]) => [Math.pow(e, -0.5), Math.log(s)] as [number, number]);
  const a = plotArea();
  const pxs = pts.map((p) => p[0]);
  const pys = pts.map((p) => p[1]);
  const xs = linearScale(Math.min(...pxs), Math.max(...pxs), a.x0, a.x1);
  const ys = linearScale(Math.min(...pys), Math.max(...pys), a.y0, a.y1);
  doc.axes(xs, ys, xlabel, ylabel);
  const fit = leastSquares(pxs, pys);
  const xlo = Math.min(...pxs);
  const xhi = Math.max(...pxs);
  doc.polyline(
    [
      [xs(xlo), ys(fit.slope * xlo + fit.intercept)],
      [xs(xhi), ys(fit.slope * xhi + fit.intercept)],
    ],
    '#aa5533',
    1.6,
  );
  pts.forEach(([x, y]) => doc.circle(xs(x), ys(y), 3.4, '#4477aa'));
  doc.text(
    a.x0 + 10,
    a.y1 + 14,
    `slope ${fit.slope.toFixed(3)}, r2 ${fit.r2.toFixed(4)}`,
    12,
    'start',
  );
  return doc.render();
}

function exponentFit(spec: FigureSpec, table: Table): string {
  const xcol = spec.xColumn ?? 'x';
  const ycol = spec.yColumn ?? 'y';
  requireColumns(table, [xcol, ycol]);
  const doc = new SvgDoc(spec.title ?? 'log-log exponent fit');
  const xlabel = spec.xlabel ?? `log ${xcol}`;
  const ylabel = spec.ylabel ?? `log ${ycol}`;
  const xv = column(table, xcol);
  const yv = column(table, ycol);
  const data = finitePairs(xv, yv).filter(([x, y]) => x > 0 && y > 0);
  if (data.length === 0) return emptyAxes(doc, xlabel, ylabel);
  const pts = data.map(([x, y]) => [Math.log(x), Math.log(y)] as [number, number]);
  const a = plotArea();
  const pxs = pts.map((p) => p[0]);
  const pys = pts.map((p) => p[1]);
  const xs = linearScale(Math.min(...pxs), Math.max(...pxs), a.x0, a.x1);
  const ys = linearScale(Math.min(...pys), Math.max(...pys), a.y0, a.y1);
  doc.axes(xs, ys, xlabel, ylabel);
  const fit = leastSquares(pxs, pys);
  const xlo = Math.min(...pxs);
  const xhi = Math.max(...pxs);
  doc.polyline(
    [
      [xs(xlo), ys(fit.slope * xlo + fit.intercept)],
      [xs(xhi), ys(fit.slope * xhi + fit.intercept)],
    ],
    '#aa5533',
    1.6,
  );
  pts.forEach(([x, y]) => doc.circle(xs(x), ys(y), 3.4, '#4477aa'));
  doc.text(a.x0 + 10, a.y1 + 14, `exponent ${fit.slope.toFixed(3)}`, 12, 'start');
  return doc.render();
}
