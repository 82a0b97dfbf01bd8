/**
 * Figure assembly: pure functions from parsed artifact data to SVG strings.
 * File I/O lives in the per-figure entry scripts.
 */

import type { CloudFits, CollapseGroup, Profile, Spectrum, Timeseries } from "./csv.js";
import {
  PALETTE,
  PanelBox,
  axes,
  circles,
  document,
  extent,
  fmt,
  legend,
  linearScale,
  logScale,
  padded,
  polyline,
  px,
  FONT,
} from "./svg.js";

const PANEL: PanelBox = { x0: 60, y0: 30, width: 320, height: 220 };

function panelAt(col: number): PanelBox {
  return { ...PANEL, x0: PANEL.x0 + col * 440 };
}

/** Two panels: the magnetization trace and its Fourier spectrum. */
export function figQuench(series: Timeseries, spectrum: Spectrum): string {
  const left = panelAt(0);
  const right = panelAt(1);
  const sxT = linearScale(extent(series.t), [left.x0, left.x0 + left.width]);
  const syM = linearScale(padded(extent(series.m)), [left.y0 + left.height, left.y0]);
  const sxE = linearScale(extent(spectrum.energy), [right.x0, right.x0 + right.width]);
  const syA = linearScale(padded([0, extent(spectrum.amplitude)[1]]), [right.y0 + right.height, right.y0]);
  const site = series.meta["site"];
  const title = site === undefined ? "" : `measured site ${site}`;
  const body = [
    polyline(series.t, series.m, sxT, syM, PALETTE[0]),
    axes(left, sxT, syM, "t", "m_x(t)", title),
    polyline(spectrum.energy, spectrum.amplitude, sxE, syA, PALETTE[1]),
    axes(right, sxE, syA, "E", "amplitude", "Fourier transform"),
  ].join("\n");
  return document(right.x0 + right.width + 40, 300, body);
}

/** Overlaid curves against t/N, one color per system size. */
export function figCollapse(groups: CollapseGroup[]): string {
  if (groups.length === 0) throw new Error("collapse figure needs at least one size");
  const box = panelAt(0);
  const allX = groups.flatMap((g) => g.x);
  const allM = groups.flatMap((g) => g.m);
  const sx = linearScale(extent(allX), [box.x0, box.x0 + box.width]);
  const sy = linearScale(padded(extent(allM)), [box.y0 + box.height, box.y0]);
  const body = [
    ...groups.map((g, i) => polyline(g.x, g.m, sx, sy, PALETTE[i % PALETTE.length])),
    axes(box, sx, sy, "t/N", "m_x", "finite-size collapse"),
    legend(box, groups.map((g, i) => [`N = ${g.nSites}`, PALETTE[i % PALETTE.length]])),
  ].join("\n");
  return document(box.x0 + box.width + 40, 300, body);
}

/**
 * Two panels: screening profiles dm_j per coupling, and the length-scale law
 * xi against 1/J' on a semilog-y axis.
 */
export function figCloud(profiles: Profile[], fits: CloudFits): string {
  const active = profiles.filter((p) => p.jPrime !== 1.0);
  if (active.length === 0) throw new Error("cloud figure needs at least one impurity profile");
  const left = panelAt(0);
  const right = panelAt(1);
  const sorted = [...active].sort((a, b) => a.jPrime - b.jPrime);

  const allJ = sorted.flatMap((p) => p.j);
  const positive = sorted.flatMap((p) => p.dm.filter((v) => v > 0));
  if (positive.length === 0) throw new Error("cloud figure: all dm values are zero");
  const sxJ = linearScale(extent(allJ), [left.x0, left.x0 + left.width]);
  const syDm = logScale(extent(positive), [left.y0 + left.height, left.y0]);
  const leftBody = sorted.map((p, i) => {
    const keep = p.dm.map((v, k) => [p.j[k], v] as const).filter(([, v]) => v > 0);
    const color = PALETTE[i % PALETTE.length];
    return (
      polyline(keep.map(([j]) => j), keep.map(([, v]) => v), sxJ, syDm, color) +
      circles(keep.map(([j]) => j), keep.map(([, v]) => v), sxJ, syDm, color)
    );
  });

  const pairs = Object.entries(fits.screening_fits)
    .filter(([, f]) => typeof f.xi === "number")
    .map(([jp, f]) => ({ invJp: 1 / Number(jp), xi: f.xi as number }))
    .sort((a, b) => a.invJp - b.invJp);
  if (pairs.length === 0) throw new Error("cloud figure: no screening fits");
  const sxInv = linearScale(padded(extent(pairs.map((p) => p.invJp))), [right.x0, right.x0 + right.width]);
  const syXi = logScale(extent(pairs.map((p) => p.xi)), [right.y0 + right.height, right.y0]);
  const rightBody = [
    circles(pairs.map((p) => p.invJp), pairs.map((p) => p.xi), sxInv, syXi, PALETTE[0]),
  ];
  const law = fits.kondo_law;
  if (law && typeof law.a_coefficient === "number" && typeof law.intercept === "number") {
    const [lo, hi] = sxInv.domain;
    const line = [lo, hi].map((v) => Math.exp(law.intercept! + law.a_coefficient! * v));
    rightBody.push(polyline([lo, hi], line, sxInv, syXi, PALETTE[1]));
    rightBody.push(
      `<text x="${px(right.x0 + 10)}" y="${px(right.y0 + 16)}" ${FONT} font-size="10">slope A = ${fmt(law.a_coefficient)}</text>`,
    );
  }
  const body = [
    ...leftBody,
    axes(left, sxJ, syDm, "site j", "dm_j", "screening profiles"),
    legend(left, sorted.map((p, i) => [`J' = ${fmt(p.jPrime)}`, PALETTE[i % PALETTE.length]])),
    ...rightBody,
    axes(right, sxInv, syXi, "1/J'", "xi", "length-scale law"),
  ].join("\n");
  return document(right.x0 + right.width + 40, 300, body);
}
