/** SVG figure rendering from experiment CSV files.
 *
 * Three figure kinds:
 *  - convergence: log-log decay curve (e.g. error vs T) with a fitted slope
 *    annotation, cross-checked against the CSV's stored summary slope;
 *  - growth: log-log ball-mass growth from a measures CSV, same cross-check;
 *  - limitset: boundary-measure atoms on a line segment, weight as size.
 *
 * The renderer never recomputes mathematics: it only re-fits straight lines
 * to data the CSV already contains, as a schema-drift check.
 */

import { readFileSync, writeFileSync } from "node:fs";
import {
  ExperimentTable,
  metadataNumber,
  numericColumn,
  parseExperimentCsv,
} from "./csv.js";
import { fitLine, fitLogLogSlope } from "./fit.js";

export type FigureKind = "convergence" | "limitset" | "growth";

export interface FigureSpec {
  kind: FigureKind;
  /** input CSV path */
  input: string;
  /** output SVG path */
  output: string;
  xLabel?: string;
  yLabel?: string;
  title?: string;
  /** optional reference slope drawn as a dashed guide line */
  expectedSlope?: number;
  /** column/summary-key overrides (defaults depend on kind) */
  xColumn?: string;
  yColumn?: string;
  slopeKey?: string;
  /** for tables with a `kind` discriminator column: keep only these rows */
  rowKind?: string;
}

export interface RenderResult {
  svg: string;
  /** slope annotated on the figure (absent for limitset) */
  slope?: number;
}

const SLOPE_TOL = 1e-6;
const W = 640;
const H = 440;
const M = { left: 70, right: 20, top: 40, bottom: 50 };

export function parseFigureSpec(json: string): FigureSpec {
  const raw = JSON.parse(json);
  const kinds: FigureKind[] = ["convergence", "limitset", "growth"];
  if (!kinds.includes(raw.kind)) {
    throw new Error(`figure kind must be one of ${kinds.join("|")}, got '${raw.kind}'`);
  }
  if (typeof raw.input !== "string" || typeof raw.output !== "string") {
    throw new Error("figure spec needs string 'input' and 'output' paths");
  }
  return raw as FigureSpec;
}

export function render(spec: FigureSpec): RenderResult {
  const table = parseExperimentCsv(readFileSync(spec.input, "utf8"));
  let result: RenderResult;
  if (spec.kind === "limitset") {
    result = { svg: renderLimitSet(table, spec) };
  } else {
    result = renderLogLog(table, spec);
  }
  writeFileSync(spec.output, result.svg);
  return result;
}

function filterRows(table: ExperimentTable, spec: FigureSpec): ExperimentTable {
  if (!spec.rowKind) return table;
  const idx = table.columns.indexOf("kind");
  if (idx < 0) throw new Error("rowKind filter needs a 'kind' column");
  return {
    ...table,
    rows: table.rows.filter((r) => r[idx] === spec.rowKind),
  };
}

function defaultsFor(spec: FigureSpec): Required<Pick<FigureSpec, "xColumn" | "yColumn" | "slopeKey">> & { rowKind?: string } {
  if (spec.kind === "growth") {
    return {
      xColumn: spec.xColumn ?? "x",
      yColumn: spec.yColumn ?? "value",
      slopeKey: spec.slopeKey ?? "ball_slope",
      rowKind: spec.rowKind ?? "ball",
    };
  }
  return {
    xColumn: spec.xColumn ?? "T",
    yColumn: spec.yColumn ?? "abs_err",
    slopeKey: spec.slopeKey ?? "error_slope",
    rowKind: spec.rowKind,
  };
}

function renderLogLog(table: ExperimentTable, spec: FigureSpec): RenderResult {
  const d = defaultsFor(spec);
  const filtered = filterRows(table, { ...spec, rowKind: d.rowKind });
  const xs = numericColumn(filtered, d.xColumn);
  const ys = numericColumn(filtered, d.yColumn);
  const fit = fitLogLogSlope(xs, ys);
  const stored = metadataNumber(table, d.slopeKey);
  if (Math.abs(fit.slope - stored) > SLOPE_TOL) {
    throw new Error(
      `re-fit slope ${fit.slope} disagrees with CSV summary '${d.slopeKey}' = ` +
        `${stored} by more than ${SLOPE_TOL}; schema drift?`,
    );
  }

  const lx = xs.map((v) => Math.log10(v));
  const ly = ys.map((v) => Math.log10(Math.max(v, 1e-15)));
  const [x0, x1] = pad(Math.min(...lx), Math.max(...lx));
  const [y0, y1] = pad(Math.min(...ly), Math.max(...ly));
  const X = (v: number) => M.left + ((v - x0) / (x1 - x0)) * (W - M.left - M.right);
  const Y = (v: number) => H - M.bottom - ((v - y0) / (y1 - y0)) * (H - M.top - M.bottom);

  const parts: string[] = [];
  parts.push(svgOpen(spec.title ?? `${spec.kind} (${d.yColumn} vs ${d.xColumn})`));
  parts.push(axes(x0, x1, y0, y1, X, Y, spec.xLabel ?? d.xColumn, spec.yLabel ?? d.yColumn));

  // fitted line in natural-log space -> same line in log10 space
  const lnFit = fitLine(lx, ly);
  parts.push(
    line(X(x0), Y(lnFit.intercept + lnFit.slope * x0), X(x1), Y(lnFit.intercept + lnFit.slope * x1), "#c0392b", 1.5),
  );
  if (spec.expectedSlope !== undefined) {
    const cx = (x0 + x1) / 2;
    const cy = lnFit.intercept + lnFit.slope * cx;
    parts.push(
      `<line x1="${X(x0)}" y1="${Y(cy + spec.expectedSlope * (x0 - cx))}" ` +
        `x2="${X(x1)}" y2="${Y(cy + spec.expectedSlope * (x1 - cx))}" ` +
        `stroke="#7f8c8d" stroke-width="1" stroke-dasharray="6 4"/>`,
    );
  }
  for (let i = 0; i < lx.length; i++) {
    parts.push(`<circle cx="${X(lx[i])}" cy="${Y(ly[i])}" r="4" fill="#2980b9"/>`);
  }
  parts.push(
    `<text x="${W - M.right - 8}" y="${M.top + 16}" text-anchor="end" ` +
      `font-family="monospace" font-size="14">slope = ${fit.slope.toFixed(6)}</text>`,
  );
  if (spec.expectedSlope !== undefined) {
    parts.push(
      `<text x="${W - M.right - 8}" y="${M.top + 34}" text-anchor="end" ` +
        `font-family="monospace" font-size="12" fill="#7f8c8d">expected = ${spec.expectedSlope.toFixed(4)}</text>`,
    );
  }
  parts.push("</svg>");
  return { svg: parts.join("\n"), slope: fit.slope };
}

function renderLimitSet(table: ExperimentTable, spec: FigureSpec): string {
  const pts = numericColumn(table, spec.xColumn ?? "point");
  const wts = numericColumn(table, spec.yColumn ?? "weight");
  const x0 = Math.min(...pts);
  const x1 = Math.max(...pts);
  const wMax = Math.max(...wts);
  const X = (v: number) => M.left + ((v - x0) / (x1 - x0 || 1)) * (W - M.left - M.right);
  const yMid = H / 2;
  const parts: string[] = [];
  parts.push(svgOpen(spec.title ?? "boundary measure atoms"));
  parts.push(line(M.left, yMid, W - M.right, yMid, "#2c3e50", 1));
  for (const v of niceTicks(x0, x1)) {
    parts.push(line(X(v), yMid - 4, X(v), yMid + 4, "#2c3e50", 1));
    parts.push(
      `<text x="${X(v)}" y="${yMid + 22}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(v)}</text>`,
    );
  }
  for (let i = 0; i < pts.length; i++) {
    const r = 1.0 + 6.0 * Math.sqrt(wts[i] / wMax);
    parts.push(
      `<circle cx="${X(pts[i])}" cy="${yMid}" r="${r.toFixed(2)}" fill="#2980b9" fill-opacity="0.45"/>`,
    );
  }
  parts.push(
    `<text x="${W - M.right - 8}" y="${M.top}" text-anchor="end" font-family="monospace" font-size="12">` +
      `${pts.length} atoms, total mass ${fmt(wts.reduce((a, b) => a + b, 0))}</text>`,
  );
  parts.push(`<text x="${M.left}" y="${H - 14}" font-family="sans-serif" font-size="12">${spec.xLabel ?? "boundary point"}</text>`);
  parts.push("</svg>");
  return parts.join("\n");
}

// ---------------------------------------------------------------------------
// SVG helpers

function svgOpen(title: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">` +
    `\n<rect width="${W}" height="${H}" fill="white"/>` +
    `\n<text x="${W / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">${escapeXml(title)}</text>`
  );
}

function line(x1: number, y1: number, x2: number, y2: number, stroke: string, width: number): string {
  return `<line x1="${x1.toFixed(1)}" y1="${y1.toFixed(1)}" x2="${x2.toFixed(1)}" y2="${y2.toFixed(1)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

function axes(
  x0: number,
  x1: number,
  y0: number,
  y1: number,
  X: (v: number) => number,
  Y: (v: number) => number,
  xLabel: string,
  yLabel: string,
): string {
  const parts: string[] = [];
  parts.push(line(M.left, H - M.bottom, W - M.right, H - M.bottom, "#2c3e50", 1));
  parts.push(line(M.left, M.top, M.left, H - M.bottom, "#2c3e50", 1));
  for (let e = Math.ceil(x0); e <= Math.floor(x1); e++) {
    parts.push(line(X(e), H - M.bottom, X(e), H - M.bottom + 5, "#2c3e50", 1));
    parts.push(
      `<text x="${X(e)}" y="${H - M.bottom + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">1e${e}</text>`,
    );
  }
  for (let e = Math.ceil(y0); e <= Math.floor(y1); e++) {
    parts.push(line(M.left - 5, Y(e), M.left, Y(e), "#2c3e50", 1));
    parts.push(
      `<text x="${M.left - 8}" y="${Y(e) + 4}" text-anchor="end" font-family="sans-serif" font-size="11">1e${e}</text>`,
    );
  }
  parts.push(
    `<text x="${(M.left + W - M.right) / 2}" y="${H - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">${escapeXml(xLabel)} (log)</text>`,
  );
  parts.push(
    `<text x="16" y="${(M.top + H - M.bottom) / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 ${(M.top + H - M.bottom) / 2})">${escapeXml(yLabel)} (log)</text>`,
  );
  return parts.join("\n");
}

function pad(lo: number, hi: number): [number, number] {
  const span = hi - lo || 1;
  return [lo - 0.06 * span, hi + 0.06 * span];
}

function niceTicks(lo: number, hi: number): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / 4)));
  const mult = span / step > 8 ? 2 : 1;
  const s = step * mult;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12; v += s) {
    ticks.push(v);
  }
  return ticks;
}

function fmt(v: number): string {
  return Math.abs(v) >= 1e4 || (v !== 0 && Math.abs(v) < 1e-3)
    ? v.toExponential(2)
    : String(Math.round(v * 1e6) / 1e6);
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
