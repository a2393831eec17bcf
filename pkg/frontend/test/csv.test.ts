import { describe, expect, it } from "vitest";
import { aggregate, median, parseBenchmarkCsv } from "../src/csv.js";

const HEADER =
  "solver,variant,omega_deg_per_frame,trans_frac_per_frame,sigma_px," +
  "baseline_ratio,seed,median_err_px,mean_err_px,p90_err_px,runtime_us";

function row(
  solver: string,
  variant: string,
  omega: number,
  seed: number,
  med: number,
): string {
  return `${solver},${variant},${omega},0.02,0.5,0,${seed},${med},${med},${med},0`;
}

describe("parseBenchmarkCsv", () => {
  it("parses metadata and records", () => {
    const text = `# focal_px=1000\n# seed=3\n${HEADER}\n${row("rot", "v2", 15, 0, 1.5)}\n`;
    const csv = parseBenchmarkCsv(text);
    expect(csv.metadata.focal_px).toBe("1000");
    expect(csv.records).toHaveLength(1);
    expect(csv.records[0].solver).toBe("rot");
    expect(csv.records[0].medianErrPx).toBe(1.5);
  });

  it("rejects an empty file", () => {
    expect(() => parseBenchmarkCsv("")).toThrow(/empty/);
  });

  it("rejects a wrong header", () => {
    expect(() => parseBenchmarkCsv("a,b,c\n1,2,3\n")).toThrow(/header/);
  });

  it("rejects short rows", () => {
    expect(() => parseBenchmarkCsv(`${HEADER}\nrot,v2,1\n`)).toThrow(/11 fields/);
  });
});

describe("aggregate", () => {
  it("takes the median over seeds at each x", () => {
    const text = [
      HEADER,
      row("rot", "v2", 0, 0, 1.0),
      row("rot", "v2", 0, 1, 3.0),
      row("rot", "v2", 0, 2, 2.0),
      row("rot", "v2", 15, 0, 5.0),
      row("txy", "v2", 0, 0, 9.0),
    ].join("\n");
    const csv = parseBenchmarkCsv(text);
    const pts = aggregate(csv.records, "rot", "v2", "omegaDegPerFrame");
    expect(pts).toEqual([
      { x: 0, y: 2.0 },
      { x: 15, y: 5.0 },
    ]);
  });
});

describe("median", () => {
  it("handles even counts", () => {
    expect(median([4, 1, 3, 2])).toBe(2.5);
  });
  it("throws on empty input", () => {
    expect(() => median([])).toThrow();
  });
});
