export interface PowerFit {
  slope: number;
  intercept: number; // in log space
  ci95: number; // 1.96 * standard error of the slope; 0 when n < 3
  n: number; // points used (positive finite pairs)
}

/** Least-squares slope of log y against log x, centered for stability.
 * Pairs with a non-positive or non-finite entry are dropped. */
export function logLogFit(xs: number[], ys: number[]): PowerFit | null {
  const lx: number[] = [];
  const ly: number[] = [];
  for (let i = 0; i < xs.length; i++) {
    if (xs[i] > 0 && ys[i] > 0 && isFinite(xs[i]) && isFinite(ys[i])) {
      lx.push(Math.log(xs[i]));
      ly.push(Math.log(ys[i]));
    }
  }
  const n = lx.length;
  if (n < 2) return null;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx === 0) return null;
  const slope = sxy / sxx;
  const intercept = my - slope * mx;
  let ci95 = 0;
  if (n > 2) {
    let sse = 0;
    for (let i = 0; i < n; i++) {
      const e = ly[i] - (intercept + slope * lx[i]);
      sse += e * e;
    }
    ci95 = 1.96 * Math.sqrt(sse / (n - 2) / sxx);
  }
  return { slope, intercept, ci95, n };
}
