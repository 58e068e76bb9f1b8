/** Deterministic SVG assembly: fixed canvas, fonts and formatting. */

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { left: 70, right: 24, top: 40, bottom: 52 };
const FONT = 'font-family="Helvetica, Arial, sans-serif"';

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return '0';
  const v = Math.round(x * 100) / 100;
  return Object.is(v, -0) ? '0' : v.toFixed(2);
}

export interface Scale {
  (v: number): number;
  ticks: number[];
  label: (v: number) => string;
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((c) => c * mag);
  const step = candidates.find((c) => span / c <= n + 0.5) ?? candidates[4];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function linearScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  if (!(hi > lo)) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const f = ((v: number) => pxLo + ((v - lo) / (hi - lo)) * (pxHi - pxLo)) as Scale;
  f.ticks = niceTicks(lo, hi);
  f.label = (v: number) => {
    const a = Math.abs(v);
    if (a !== 0 && (a >= 1e4 || a < 1e-2)) return v.toExponential(1);
    return String(Math.round(v * 1000) / 1000);
  };
  return f;
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" ${FONT} font-size="15">${escapeXml(title)}</text>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ''): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : '';
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}"/>`);
  }

  polygon(pts: Array<[number, number]>, fill: string, opacity: number): void {
    const d = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    this.parts.push(`<polygon points="${d}" fill="${fill}" fill-opacity="${opacity}"/>`);
  }

  polyline(pts: Array<[number, number]>, stroke: string, width = 1.5, dash = ''): void {
    const d = pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    const dd = dash ? ` stroke-dasharray="${dash}"` : '';
    this.parts.push(
      `<polyline points="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dd}/>`,
    );
  }

  text(x: number, y: number, content: string, size = 12, anchor = 'middle', fill = '#222'): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ${FONT} font-size="${size}" fill="${fill}">${escapeXml(content)}</text>`,
    );
  }

  axes(xs: Scale, ys: Scale, xlabel: string, ylabel: string): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    this.line(x0, y0, x1, y0, '#333');
    this.line(x0, y0, x0, y1, '#333');
    for (const t of xs.ticks) {
      const px = xs(t);
      this.line(px, y0, px, y0 + 5, '#333');
      this.text(px, y0 + 18, xs.label(t), 11);
    }
    for (const t of ys.ticks) {
      const py = ys(t);
      this.line(x0 - 5, py, x0, py, '#333');
      this.text(x0 - 8, py + 4, ys.label(t), 11, 'end');
    }
    this.text((x0 + x1) / 2, HEIGHT - 14, xlabel, 12);
    this.parts.push(
      `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" ${FONT} font-size="12" fill="#222" transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(ylabel)}</text>`,
    );
  }

  footer(note: string): void {
    this.text(WIDTH / 2, HEIGHT - 2, note, 10, 'middle', '#a22');
  }

  render(): string {
    return this.parts.join('\n') + '\n</svg>\n';
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
