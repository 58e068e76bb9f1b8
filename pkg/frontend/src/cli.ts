/** gilab-plots: render convergence figures from gilab CSV logs. */

import { existsSync, readFileSync, writeFileSync } from 'node:fs';

import { SchemaMismatch, parseCsv } from './csv.js';
import { FigureKind, FigureSpec, renderFigure } from './figures.js';
import { rasterizeSvg } from './png.js';
import { HEIGHT, WIDTH } from './svg.js';

const KINDS: FigureKind[] = ['gh-convergence', 'decay-fit', 'exponent-fit'];

interface Args {
  kind: FigureKind;
  input: string;
  output: string;
  png: boolean;
  force: boolean;
  title?: string;
  xColumn?: string;
  yColumn?: string;
}

function usage(): string {
  return (
    'usage: gilab-plots --kind <gh-convergence|decay-fit|exponent-fit> ' +
    '--input <csv> --output <svg> [--png] [--force] [--title T] ' +
    '[--x-column C] [--y-column C]'
  );
}

export function parseArgs(argv: string[]): Args {
  const get = (flag: string): string | undefined => {
    const i = argv.indexOf(flag);
    if (i >= 0 && i + 1 < argv.length) return argv[i + 1];
    const pref = argv.find((a) => a.startsWith(flag + '='));
    return pref ? pref.slice(flag.length + 1) : undefined;
  };
  const kind = get('--kind');
  const input = get('--input');
  const output = get('--output');
  if (!kind || !input || !output || !KINDS.includes(kind as FigureKind)) {
    throw new Error(usage());
  }
  return {
    kind: kind as FigureKind,
    input,
    output,
    png: argv.includes('--png'),
    force: argv.includes('--force'),
    title: get('--title'),
    xColumn: get('--x-column'),
    yColumn: get('--y-column'),
  };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error((e as Error).message);
    return 2;
  }
  try {
    if (existsSync(args.output) && !args.force) {
      console.error(`refusing to overwrite ${args.output}; pass --force`);
      return 2;
    }
    const table = parseCsv(readFileSync(args.input, 'utf-8'));
    const spec: FigureSpec = {
      kind: args.kind,
      title: args.title,
      xColumn: args.xColumn,
      yColumn: args.yColumn,
    };
    const svg = renderFigure(spec, table);
    writeFileSync(args.output, svg);
    console.log(`wrote ${args.output}`);
    if (args.png) {
      const pngPath = args.output.replace(/\.svg$/, '') + '.png';
      if (existsSync(pngPath) && !args.force) {
        console.error(`refusing to overwrite ${pngPath}; pass --force`);
        return 2;
      }
      writeFileSync(pngPath, rasterizeSvg(svg, WIDTH, HEIGHT));
      console.log(`wrote ${pngPath}`);
    }
    return 0;
  } catch (e) {
    if (e instanceof SchemaMismatch) {
      console.error(`SchemaMismatch: ${e.message}`);
      return 1;
    }
    console.error(String(e));
    return 1;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(run(process.argv.slice(2)));
}
