/** Unweighted least-squares line fit on (log x, log y), matching the
 * producer's slope computation so re-fits are comparable to 1e-6. */

export interface LineFit {
  slope: number;
  intercept: number;
}

export function fitLine(xs: number[], ys: number[]): LineFit {
  const n = xs.length;
  if (n < 2 || ys.length !== n) {
    throw new Error("fit needs at least two matching points");
  }
  let sx = 0, sy = 0;
  for (let i = 0; i < n; i++) {
    sx += xs[i];
    sy += ys[i];
  }
  const mx = sx / n, my = sy / n;
  let sxx = 0, sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

export function fitLogLogSlope(xs: number[], ys: number[], floor = 1e-15): LineFit {
  return fitLine(
    xs.map((x) => Math.log(x)),
    ys.map((y) => Math.log(Math.max(y, floor))),
  );
}
