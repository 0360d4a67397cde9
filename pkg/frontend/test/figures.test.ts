import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { metadataNumber, numericColumn, parseExperimentCsv } from "../src/csv.js";
import { fitLogLogSlope } from "../src/fit.js";
import { render } from "../src/figures.js";

const FIX = join(__dirname, "fixtures");
const out = mkdtempSync(join(tmpdir(), "horolab-plots-"));

describe("csv contract", () => {
  it("parses metadata, header, and rows", () => {
    const t = parseExperimentCsv(readFileSync(join(FIX, "phi.csv"), "utf8"));
    expect(t.columns).toEqual(["T", "average", "target", "abs_err"]);
    expect(t.rows.length).toBe(10);
    expect(t.metadata.tool_version).toBeDefined();
    expect(metadataNumber(t, "delta_hat")).toBeGreaterThan(0.5);
  });

  it("fails loudly on missing columns", () => {
    const t = parseExperimentCsv("# a = 1\nx,y\n1,2\n");
    expect(() => numericColumn(t, "z")).toThrow(/missing required column/);
  });

  it("fails loudly on non-numeric cells", () => {
    const t = parseExperimentCsv("x\nfoo\n");
    expect(() => numericColumn(t, "x")).toThrow(/non-numeric/);
  });
});

describe("slope re-fit (acceptance: matches CSV summary within 1e-6)", () => {
  it("phi experiment error_slope", () => {
    const t = parseExperimentCsv(readFileSync(join(FIX, "phi.csv"), "utf8"));
    const fit = fitLogLogSlope(numericColumn(t, "T"), numericColumn(t, "abs_err"));
    expect(Math.abs(fit.slope - metadataNumber(t, "error_slope"))).toBeLessThan(1e-6);
  });

  it("measures experiment ball_slope", () => {
    const t = parseExperimentCsv(readFileSync(join(FIX, "measures.csv"), "utf8"));
    const kindIdx = t.columns.indexOf("kind");
    const ball = { ...t, rows: t.rows.filter((r) => r[kindIdx] === "ball") };
    const fit = fitLogLogSlope(numericColumn(ball, "x"), numericColumn(ball, "value"));
    expect(Math.abs(fit.slope - metadataNumber(t, "ball_slope"))).toBeLessThan(1e-6);
  });
});

describe("figure rendering", () => {
  it("convergence figure renders with the fitted slope annotated", () => {
    const output = join(out, "conv.svg");
    const res = render({
      kind: "convergence",
      input: join(FIX, "phi.csv"),
      output,
      expectedSlope: -0.178655,
    });
    const svg = readFileSync(output, "utf8");
    expect(svg).toContain("<svg");
    expect(svg).toContain("slope = ");
    expect(res.slope).toBeDefined();
    expect(svg).toContain(`slope = ${res.slope!.toFixed(6)}`);
    // 10 data points drawn
    expect(svg.match(/<circle/g)!.length).toBe(10);
  });

  it("growth figure renders from a measures CSV", () => {
    const output = join(out, "growth.svg");
    const res = render({
      kind: "growth",
      input: join(FIX, "measures.csv"),
      output,
    });
    const svg = readFileSync(output, "utf8");
    expect(svg).toContain("slope = ");
    expect(res.slope).toBeDefined();
  });

  it("limitset figure renders atoms with weight-scaled sizes", () => {
    const output = join(out, "limitset.svg");
    const res = render({
      kind: "limitset",
      input: join(FIX, "ps.csv"),
      output,
    });
    expect(res.slope).toBeUndefined();
    const svg = readFileSync(output, "utf8");
    const circles = svg.match(/<circle/g)!;
    expect(circles.length).toBeGreaterThan(100);
    expect(svg).toContain("atoms, total mass");
  });

  it("rejects a tampered summary slope (schema-drift guard)", () => {
    const text = readFileSync(join(FIX, "phi.csv"), "utf8");
    const tampered = text.replace(/# error_slope = [^\n]+/, "# error_slope = -0.5");
    const input = join(out, "tampered.csv");
    writeFileSync(input, tampered);
    expect(() =>
      render({ kind: "convergence", input, output: join(out, "t.svg") }),
    ).toThrow(/disagrees with CSV summary/);
  });

  it("rejects unknown figure kinds in specs", async () => {
    const { parseFigureSpec } = await import("../src/figures.js");
    expect(() =>
      parseFigureSpec(JSON.stringify({ kind: "pie", input: "a", output: "b" })),
    ).toThrow(/figure kind/);
  });
});
