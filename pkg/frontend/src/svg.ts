/**
 * Minimal deterministic SVG plotting: linear/log scales, tick generation and
 * a small element builder.  No timestamps, no randomness, fixed styling, so
 * identical inputs always render identical bytes.
 */

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
export const FONT = "font-family=\"Helvetica,Arial,sans-serif\"";

export interface Scale {
  (v: number): number;
  ticks(): number[];
  domain: [number, number];
}

/** Round a coordinate to a fixed precision so output is stable. */
export function px(v: number): string {
  const r = v.toFixed(2);
  return r === "-0.00" ? "0.00" : r;
}

/** Tick label formatting: fixed precision, trailing zeros trimmed. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(parseFloat(v.toPrecision(6)));
}

function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  if (!(d1 > d0)) throw new Error(`degenerate domain [${d0}, ${d1}]`);
  const scale = ((v: number) => r0 + ((v - d0) / (d1 - d0)) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.ticks = () => {
    const step = niceStep(d1 - d0, 5);
    const out: number[] = [];
    for (let t = Math.ceil(d0 / step) * step; t <= d1 + 1e-9 * step; t += step) {
      out.push(Math.abs(t) < 1e-12 * step ? 0 : t);
    }
    return out;
  };
  return scale;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (!(d0 > 0 && d1 > d0)) throw new Error(`log scale needs 0 < lo < hi, got [${d0}, ${d1}]`);
  const [r0, r1] = range;
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const scale = ((v: number) => r0 + ((Math.log10(v) - l0) / (l1 - l0)) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); e <= Math.floor(l1 + 1e-9); e++) {
      out.push(Math.pow(10, e));
    }
    // a decade or less: add 2x and 5x subdivisions so the axis stays readable
    if (out.length <= 2) {
      for (let e = Math.floor(l0); e <= Math.ceil(l1); e++) {
        for (const mult of [2, 3, 5]) {
          const v = mult * Math.pow(10, e);
          if (v >= d0 * (1 - 1e-9) && v <= d1 * (1 + 1e-9)) out.push(v);
        }
      }
      out.sort((a, b) => a - b);
    }
    return out;
  };
  return scale;
}

export function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale, color: string): string {
  const pts = xs.map((x, i) => `${px(sx(x))},${px(sy(ys[i]))}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="1.2" points="${pts}"/>`;
}

export function circles(xs: number[], ys: number[], sx: Scale, sy: Scale, color: string): string {
  return xs
    .map((x, i) => `<circle cx="${px(sx(x))}" cy="${px(sy(ys[i]))}" r="2.5" fill="${color}"/>`)
    .join("");
}

export interface PanelBox {
  x0: number;
  y0: number;
  width: number;
  height: number;
}

/** Axes, ticks, labels and a clip-free frame for one panel. */
export function axes(
  box: PanelBox,
  sx: Scale,
  sy: Scale,
  xLabel: string,
  yLabel: string,
  title = "",
): string {
  const { x0, y0, width, height } = box;
  const parts: string[] = [];
  parts.push(
    `<rect x="${px(x0)}" y="${px(y0)}" width="${px(width)}" height="${px(height)}" fill="none" stroke="#000" stroke-width="0.8"/>`,
  );
  for (const t of sx.ticks()) {
    const X = sx(t);
    if (X < x0 - 0.5 || X > x0 + width + 0.5) continue;
    parts.push(`<line x1="${px(X)}" y1="${px(y0 + height)}" x2="${px(X)}" y2="${px(y0 + height - 4)}" stroke="#000" stroke-width="0.8"/>`);
    parts.push(`<text x="${px(X)}" y="${px(y0 + height + 14)}" ${FONT} font-size="10" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of sy.ticks()) {
    const Y = sy(t);
    if (Y < y0 - 0.5 || Y > y0 + height + 0.5) continue;
    parts.push(`<line x1="${px(x0)}" y1="${px(Y)}" x2="${px(x0 + 4)}" y2="${px(Y)}" stroke="#000" stroke-width="0.8"/>`);
    parts.push(`<text x="${px(x0 - 5)}" y="${px(Y + 3)}" ${FONT} font-size="10" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(`<text x="${px(x0 + width / 2)}" y="${px(y0 + height + 30)}" ${FONT} font-size="11" text-anchor="middle">${xLabel}</text>`);
  parts.push(
    `<text x="${px(x0 - 38)}" y="${px(y0 + height / 2)}" ${FONT} font-size="11" text-anchor="middle" transform="rotate(-90 ${px(x0 - 38)} ${px(y0 + height / 2)})">${yLabel}</text>`,
  );
  if (title) {
    parts.push(`<text x="${px(x0 + width / 2)}" y="${px(y0 - 6)}" ${FONT} font-size="11" text-anchor="middle">${title}</text>`);
  }
  return parts.join("\n");
}

export function legend(box: PanelBox, entries: Array<[string, string]>): string {
  const parts: string[] = [];
  entries.forEach(([label, color], i) => {
    const y = box.y0 + 14 + 14 * i;
    const x = box.x0 + box.width - 90;
    parts.push(`<line x1="${px(x)}" y1="${px(y)}" x2="${px(x + 18)}" y2="${px(y)}" stroke="${color}" stroke-width="1.5"/>`);
    parts.push(`<text x="${px(x + 22)}" y="${px(y + 3)}" ${FONT} font-size="10">${label}</text>`);
  });
  return parts.join("\n");
}

export function document(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="#fff"/>`,
    body,
    "</svg>",
    "",
  ].join("\n");
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(hi >= lo)) throw new Error("extent of empty data");
  if (hi === lo) {
    return [lo - 0.5, hi + 0.5];
  }
  return [lo, hi];
}

export function padded(e: [number, number], frac = 0.05): [number, number] {
  const span = e[1] - e[0];
  return [e[0] - frac * span, e[1] + frac * span];
}
