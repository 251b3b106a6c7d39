/** Diverging blue-white-red map for signed channel scores. */

export function divergingColor(value: number, absMax: number): string {
  const t = absMax > 0 ? Math.max(-1, Math.min(1, value / absMax)) : 0;
  let r: number, g: number, b: number;
  if (t >= 0) {
    r = 255;
    g = Math.round(255 * (1 - t * 0.75));
    b = Math.round(255 * (1 - t));
  } else {
    r = Math.round(255 * (1 + t));
    g = Math.round(255 * (1 + t * 0.75));
    b = 255;
  }
  return `rgb(${r},${g},${b})`;
}

export function absMax(values: number[]): number {
  let m = 0;
  for (const v of values) {
    const a = Math.abs(v);
    if (a > m) m = a;
  }
  return m;
}
