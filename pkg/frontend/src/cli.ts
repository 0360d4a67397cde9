#!/usr/bin/env node
/** CLI: `horolab-plots render --spec figure.json` renders one SVG figure
 * from an experiment CSV per the figure spec. */

import { readFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseFigureSpec, render } from "./figures.js";

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "render") {
    process.stderr.write("usage: horolab-plots render --spec <figure.json>\n");
    return 2;
  }
  const specIdx = rest.indexOf("--spec");
  if (specIdx < 0 || specIdx + 1 >= rest.length) {
    process.stderr.write("render needs --spec <figure.json>\n");
    return 2;
  }
  const specPath = rest[specIdx + 1];
  try {
    const spec = parseFigureSpec(readFileSync(specPath, "utf8"));
    const result = render(spec);
    const slopeNote = result.slope !== undefined ? ` (slope ${result.slope.toFixed(6)})` : "";
    process.stdout.write(`wrote ${spec.output}${slopeNote}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
