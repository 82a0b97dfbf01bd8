/**
 * Parsers for the simulation pipeline's artifact formats.
 *
 * All CSVs are self-describing: `#`-prefixed comment lines carry JSON
 * metadata, the first non-comment line is the column header.  Parsers throw
 * on any schema mismatch so the figure scripts fail loudly instead of
 * rendering nonsense.
 */

export interface Timeseries {
  meta: Record<string, unknown>;
  t: number[];
  m: number[];
}

export interface Spectrum {
  resolution: number;
  energy: number[];
  amplitude: number[];
}

export interface CollapseGroup {
  nSites: number;
  control: number;
  x: number[];
  m: number[];
}

export interface Profile {
  j: number[];
  dm: number[];
  jPrime: number;
  nSites: number;
}

export interface ScreeningFit {
  xi: number;
  r_squared: number;
}

export interface CloudFits {
  screening_fits: Record<string, Partial<ScreeningFit> & Record<string, unknown>>;
  kondo_law?: { a_coefficient?: number; intercept?: number; r_squared?: number };
}

function dataLines(text: string, expectedHeader: string, label: string) {
  const lines = text.split("\n").map((s) => s.trim()).filter((s) => s.length > 0);
  const comments = lines.filter((s) => s.startsWith("#"));
  const rest = lines.filter((s) => !s.startsWith("#"));
  if (rest.length === 0 || rest[0] !== expectedHeader) {
    throw new Error(`${label}: expected header '${expectedHeader}', got '${rest[0] ?? ""}'`);
  }
  const rows = rest.slice(1);
  if (rows.length === 0) {
    throw new Error(`${label}: no data rows`);
  }
  return { comments, rows };
}

function num(field: string, label: string): number {
  const v = Number(field);
  if (!Number.isFinite(v)) {
    throw new Error(`${label}: non-numeric field '${field}'`);
  }
  return v;
}

function commentJson(comments: string[], tag: string): unknown {
  const prefix = `# ${tag} `;
  const line = comments.find((c) => c.startsWith(prefix));
  if (line === undefined) return undefined;
  return JSON.parse(line.slice(prefix.length));
}

export function parseTimeseries(text: string): Timeseries {
  const { comments, rows } = dataLines(text, "t,m_x", "timeseries");
  const meta = (commentJson(comments, "meta") ?? {}) as Record<string, unknown>;
  const t: number[] = [];
  const m: number[] = [];
  for (const row of rows) {
    const parts = row.split(",");
    if (parts.length !== 2) throw new Error(`timeseries: bad row '${row}'`);
    t.push(num(parts[0], "timeseries"));
    m.push(num(parts[1], "timeseries"));
  }
  return { meta, t, m };
}

export function parseSpectrum(text: string): Spectrum {
  const { comments, rows } = dataLines(text, "E,amplitude", "spectrum");
  const resLine = comments.find((c) => c.startsWith("# resolution "));
  const resolution = resLine ? num(resLine.slice("# resolution ".length), "spectrum") : NaN;
  const energy: number[] = [];
  const amplitude: number[] = [];
  for (const row of rows) {
    const parts = row.split(",");
    if (parts.length !== 2) throw new Error(`spectrum: bad row '${row}'`);
    energy.push(num(parts[0], "spectrum"));
    amplitude.push(num(parts[1], "spectrum"));
  }
  return { resolution, energy, amplitude };
}

export function parseCollapse(text: string): CollapseGroup[] {
  const { rows } = dataLines(text, "x,m,N,control", "collapse");
  const groups = new Map<number, CollapseGroup>();
  for (const row of rows) {
    const parts = row.split(",");
    if (parts.length !== 4) throw new Error(`collapse: bad row '${row}'`);
    const n = num(parts[2], "collapse");
    let g = groups.get(n);
    if (!g) {
      g = { nSites: n, control: num(parts[3], "collapse"), x: [], m: [] };
      groups.set(n, g);
    }
    g.x.push(num(parts[0], "collapse"));
    g.m.push(num(parts[1], "collapse"));
  }
  return [...groups.values()].sort((a, b) => a.nSites - b.nSites);
}

export function parseProfile(text: string): Profile {
  const { rows } = dataLines(text, "j,dm,J_prime,N", "profile");
  const j: number[] = [];
  const dm: number[] = [];
  let jPrime = NaN;
  let nSites = NaN;
  for (const row of rows) {
    const parts = row.split(",");
    if (parts.length !== 4) throw new Error(`profile: bad row '${row}'`);
    j.push(num(parts[0], "profile"));
    dm.push(num(parts[1], "profile"));
    jPrime = num(parts[2], "profile");
    nSites = num(parts[3], "profile");
  }
  return { j, dm, jPrime, nSites };
}

export function parseCloudFits(text: string): CloudFits {
  const data = JSON.parse(text) as CloudFits;
  if (typeof data !== "object" || data === null || !("screening_fits" in data)) {
    throw new Error("fits: missing screening_fits");
  }
  return data;
}
