import { describe, expect, it } from "vitest";
import {
  parseCloudFits,
  parseCollapse,
  parseProfile,
  parseSpectrum,
  parseTimeseries,
} from "../src/csv.js";
import { figCloud, figCollapse, figQuench } from "../src/figures.js";
import {
  COLLAPSE_CSV,
  FITS_JSON,
  PROFILE_03_CSV,
  PROFILE_05_CSV,
  PROFILE_10_CSV,
  SERIES_CSV,
  SPECTRUM_CSV,
} from "./fixtures.js";

const series = () => parseTimeseries(SERIES_CSV);
const spectrum = () => parseSpectrum(SPECTRUM_CSV);
const profiles = () =>
  [PROFILE_03_CSV, PROFILE_05_CSV, PROFILE_10_CSV].map(parseProfile);
const fits = () => parseCloudFits(FITS_JSON);

describe("figQuench", () => {
  it("renders two framed panels with both traces", () => {
    const svg = figQuench(series(), spectrum());
    expect(svg.startsWith("<svg ")).toBe(true);
    expect((svg.match(/<rect [^>]*stroke="#000"/g) ?? []).length).toBe(2);
    expect((svg.match(/<polyline /g) ?? []).length).toBe(2);
    expect(svg).toContain("Fourier transform");
    expect(svg).toContain("measured site 3");
  });

  it("is deterministic", () => {
    expect(figQuench(series(), spectrum())).toBe(figQuench(series(), spectrum()));
  });

  it("contains no timestamps", () => {
    expect(figQuench(series(), spectrum())).not.toMatch(/20\d\d-\d\d-\d\d/);
  });
});

describe("figCollapse", () => {
  it("draws one curve and one legend entry per size", () => {
    const svg = figCollapse(parseCollapse(COLLAPSE_CSV));
    expect((svg.match(/<polyline /g) ?? []).length).toBe(2);
    expect(svg).toContain("N = 6");
    expect(svg).toContain("N = 8");
    expect(svg).toContain("t/N");
  });

  it("rejects an empty family", () => {
    expect(() => figCollapse([])).toThrow(/at least one size/);
  });
});

describe("figCloud", () => {
  it("drops the impurity-free reference and keeps two profiles", () => {
    const svg = figCloud(profiles(), fits());
    expect(svg).toContain("J' = 0.3");
    expect(svg).toContain("J' = 0.5");
    expect(svg).not.toContain("J' = 1");
  });

  it("uses a log axis for the length-scale panel", () => {
    const svg = figCloud(profiles(), fits());
    // semilog-y: the xi panel carries the fitted-slope annotation and the
    // profile panel ticks sit at decade marks (0.001 ... 0.1)
    expect(svg).toContain("slope A = 0.3");
    expect(svg).toContain(">0.01<");
    expect(svg).toContain(">0.1<");
  });

  it("rejects inputs with only the reference profile", () => {
    expect(() => figCloud([parseProfile(PROFILE_10_CSV)], fits())).toThrow(
      /impurity profile/,
    );
  });
});
