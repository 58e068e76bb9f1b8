/** CSV parsing with schema validation for the gilab log formats. */

export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'SchemaMismatch';
  }
}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatch('empty file: no header row');
  }
  const header = lines[0].split(',').map((h) => h.trim());
  const rows = lines.slice(1).map((l) => l.split(',').map((c) => c.trim()));
  return { header, rows };
}

export function requireColumns(table: Table, needed: string[]): void {
  const missing = needed.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new SchemaMismatch(
      `missing columns [${missing.join(', ')}]; header was [${table.header.join(', ')}]`,
    );
  }
}

/** Numeric column; blank and non-numeric cells become NaN. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaMismatch(`column ${name} not in header`);
  }
  return table.rows.map((r) => {
    const cell = r[idx];
    if (cell === undefined || cell === '') return NaN;
    const v = Number(cell);
    return Number.isFinite(v) ? v : NaN;
  });
}
