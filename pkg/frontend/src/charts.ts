/** Minimal SVG line plotting: component time courses, raw-vs-clean
 * overlays, and the per-q tuning curves. All numbers arrive from the
 * server; this module only scales them to pixels. */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  width?: number;
  dash?: string;
  label?: string;
}

export interface PlotOptions {
  width: number;
  height: number;
  pad?: number;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

/** Scale one series into an SVG path string ("M x y L x y ..."). */
export function polylinePath(
  xs: number[],
  ys: number[],
  xDomain: [number, number],
  yDomain: [number, number],
  opts: PlotOptions,
): string {
  const pad = opts.pad ?? 4;
  const sx = (x: number) =>
    pad + ((x - xDomain[0]) / (xDomain[1] - xDomain[0] || 1)) * (opts.width - 2 * pad);
  const sy = (y: number) =>
    opts.height - pad - ((y - yDomain[0]) / (yDomain[1] - yDomain[0] || 1)) * (opts.height - 2 * pad);
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"}${sx(xs[i]).toFixed(1)} ${sy(ys[i]).toFixed(1)}`);
  }
  return parts.join(" ");
}

export function renderLinePlot(
  el: HTMLElement,
  series: Series[],
  opts: PlotOptions,
): void {
  const xAll = series.flatMap((s) => s.x);
  const yAll = series.flatMap((s) => s.y);
  const xd = extent(xAll);
  const yd = extent(yAll);
  const paths = series
    .map(
      (s) =>
        `<path d="${polylinePath(s.x, s.y, xd, yd, opts)}" fill="none" ` +
        `stroke="${s.color}" stroke-width="${s.width ?? 1.2}"` +
        (s.dash ? ` stroke-dasharray="${s.dash}"` : "") +
        (s.label ? ` data-label="${s.label}"` : "") +
        `/>`,
    )
    .join("");
  el.innerHTML =
    `<svg viewBox="0 0 ${opts.width} ${opts.height}" width="100%" ` +
    `preserveAspectRatio="none" xmlns="http://www.w3.org/2000/svg">${paths}</svg>`;
}

/** Tuning curves: log10-lambda (with a slot for lambda = 0) vs log-BCV. */
export function tuneSurfaceSeries(
  lambdaGrid: number[],
  bcv: { rows: number; cols: number; data: number[] },
  colors: string[],
): Series[] {
  const xs = lambdaGrid.map((l, i) =>
    l > 0 ? Math.log10(l) : i + 1 < lambdaGrid.length && lambdaGrid[i + 1] > 0
      ? Math.log10(lambdaGrid[i + 1]) - 1
      : -3,
  );
  const out: Series[] = [];
  for (let qi = 0; qi < bcv.rows; qi++) {
    const ys = [];
    for (let li = 0; li < bcv.cols; li++) {
      const v = bcv.data[qi * bcv.cols + li];
      ys.push(v > 0 ? Math.log(v) : NaN);
    }
    const keep = ys.map((v, i) => [xs[i], v]).filter(([, v]) => Number.isFinite(v));
    out.push({
      x: keep.map(([x]) => x),
      y: keep.map(([, y]) => y),
      color: colors[qi % colors.length],
      label: `q=${qi + 1}`,
    });
  }
  return out;
}
