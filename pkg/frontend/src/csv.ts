/**
 * Reader for the benchmark CSV emitted by `rsrig benchmark`.
 *
 * Leading `# key=value` lines carry run metadata; the fixed header is
 * validated so schema drift fails loudly.
 */

export interface BenchmarkRecord {
  solver: string;
  variant: string;
  omegaDegPerFrame: number;
  transFracPerFrame: number;
  sigmaPx: number;
  baselineRatio: number;
  seed: number;
  medianErrPx: number;
  meanErrPx: number;
  p90ErrPx: number;
  runtimeUs: number;
}

export interface BenchmarkCsv {
  records: BenchmarkRecord[];
  metadata: Record<string, string>;
}

const HEADER =
  "solver,variant,omega_deg_per_frame,trans_frac_per_frame,sigma_px," +
  "baseline_ratio,seed,median_err_px,mean_err_px,p90_err_px,runtime_us";

export function parseBenchmarkCsv(text: string): BenchmarkCsv {
  const metadata: Record<string, string> = {};
  const body: string[] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      const eq = line.indexOf("=");
      if (eq > 0) {
        metadata[line.slice(1, eq).trim()] = line.slice(eq + 1).trim();
      }
    } else if (line.trim().length > 0) {
      body.push(line);
    }
  }
  if (body.length === 0) {
    throw new Error("empty benchmark CSV");
  }
  if (body[0] !== HEADER) {
    throw new Error(`unexpected CSV header: ${body[0]}`);
  }
  const records: BenchmarkRecord[] = [];
  for (let i = 1; i < body.length; i++) {
    const parts = body[i].split(",");
    if (parts.length !== 11) {
      throw new Error(`line ${i + 1}: expected 11 fields, got ${parts.length}`);
    }
    const nums = parts.slice(2).map(Number);
    if (nums.some((x) => Number.isNaN(x))) {
      throw new Error(`line ${i + 1}: non-numeric field`);
    }
    records.push({
      solver: parts[0],
      variant: parts[1],
      omegaDegPerFrame: nums[0],
      transFracPerFrame: nums[1],
      sigmaPx: nums[2],
      baselineRatio: nums[3],
      seed: nums[4],
      medianErrPx: nums[5],
      meanErrPx: nums[6],
      p90ErrPx: nums[7],
      runtimeUs: nums[8],
    });
  }
  return { records, metadata };
}

export function median(values: number[]): number {
  if (values.length === 0) {
    throw new Error("median of empty list");
  }
  const s = [...values].sort((a, b) => a - b);
  const mid = Math.floor(s.length / 2);
  return s.length % 2 === 1 ? s[mid] : (s[mid - 1] + s[mid]) / 2;
}

/** Median of per-seed medians for one (solver, variant) at each x value. */
export function aggregate(
  records: BenchmarkRecord[],
  solver: string,
  variant: string,
  xField: "omegaDegPerFrame" | "baselineRatio",
): { x: number; y: number }[] {
  const byX = new Map<number, number[]>();
  for (const r of records) {
    if (r.solver !== solver || r.variant !== variant) continue;
    const key = r[xField];
    if (!byX.has(key)) byX.set(key, []);
    byX.get(key)!.push(r.medianErrPx);
  }
  return [...byX.entries()]
    .map(([x, ys]) => ({ x, y: median(ys) }))
    .sort((a, b) => a.x - b.x);
}
