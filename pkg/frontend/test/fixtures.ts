export const SERIES_CSV = [
  '# meta {"model":{"model":"tfic","n_sites":6},"site":3}',
  '# grid {"dt":0.5,"t_max":2.0}',
  "t,m_x",
  "0.0,1.0",
  "0.5,0.54",
  "1.0,-0.2",
  "1.5,-0.77",
  "2.0,-0.41",
  "",
].join("\n");

export const SPECTRUM_CSV = [
  '# window {"kind":"hann"}',
  "# resolution 0.12566370614359174",
  "E,amplitude",
  "0.5,0.01",
  "1.0,0.3",
  "1.5,0.05",
  "2.0,0.44",
  "2.5,0.02",
  "",
].join("\n");

export const COLLAPSE_CSV = [
  "x,m,N,control",
  "0.0,1.0,6,0.95",
  "0.5,0.2,6,0.95",
  "1.0,-0.4,6,0.95",
  "0.0,1.0,8,0.9625",
  "0.5,0.25,8,0.9625",
  "1.0,-0.35,8,0.9625",
  "",
].join("\n");

export const PROFILE_03_CSV = [
  "j,dm,J_prime,N",
  "2,0.2,0.3,12",
  "3,0.11,0.3,12",
  "4,0.06,0.3,12",
  "5,0.033,0.3,12",
  "6,0.018,0.3,12",
  "7,0.01,0.3,12",
  "",
].join("\n");

export const PROFILE_05_CSV = [
  "j,dm,J_prime,N",
  "2,0.15,0.5,12",
  "3,0.06,0.5,12",
  "4,0.024,0.5,12",
  "5,0.0096,0.5,12",
  "6,0.0038,0.5,12",
  "7,0.0015,0.5,12",
  "",
].join("\n");

export const PROFILE_10_CSV = [
  "j,dm,J_prime,N",
  "2,0.0,1.0,12",
  "3,0.0,1.0,12",
  "4,0.0,1.0,12",
  "5,0.0,1.0,12",
  "6,0.0,1.0,12",
  "7,0.0,1.0,12",
  "",
].join("\n");

export const FITS_JSON = JSON.stringify({
  n_sites: 12,
  screening_fits: {
    "0.3": { xi: 1.63, fit_window: [3, 7], r_squared: 0.999 },
    "0.5": { xi: 1.09, fit_window: [3, 7], r_squared: 0.998 },
    "1.0": { excluded: "impurity-free reference (dm = 0)" },
  },
  kondo_law: { a_coefficient: 0.3, intercept: 0.1, r_squared: 0.99 },
});
