/** Reader for the experiment CSV contract: `#`-prefixed `key = value`
 * metadata lines, then a header row, then comma-separated data rows. */

export interface ExperimentTable {
  metadata: Record<string, string>;
  columns: string[];
  rows: string[][];
}

export function parseExperimentCsv(text: string): ExperimentTable {
  const metadata: Record<string, string> = {};
  let columns: string[] | null = null;
  const rows: string[][] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trimEnd();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const body = line.replace(/^#\s*/, "");
      const eq = body.indexOf(" = ");
      if (eq >= 0) {
        metadata[body.slice(0, eq).trim()] = body.slice(eq + 3).trim();
      }
      continue;
    }
    const cells = line.split(",");
    if (columns === null) {
      columns = cells;
    } else {
      rows.push(cells);
    }
  }
  if (columns === null) {
    throw new Error("CSV has no header row");
  }
  return { metadata, columns, rows };
}

/** Numeric column accessor; throws if the column is missing or a cell does
 * not parse, so schema drift fails loudly. */
export function numericColumn(table: ExperimentTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`CSV is missing required column '${name}' (has: ${table.columns.join(", ")})`);
  }
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new Error(`non-numeric value '${row[idx]}' in column '${name}', row ${i}`);
    }
    return v;
  });
}

export function metadataNumber(table: ExperimentTable, key: string): number {
  const raw = table.metadata[key];
  if (raw === undefined) {
    throw new Error(`CSV metadata is missing '${key}'`);
  }
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new Error(`CSV metadata '${key}' is not numeric: '${raw}'`);
  }
  return v;
}
