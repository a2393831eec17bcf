import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { aggregate, parseBenchmarkCsv } from "../src/csv.js";
import { baselineFigure, velocityFigure } from "../src/figures.js";

const GOLDEN = join(__dirname, "..", "golden");

function readGolden(name: string): string {
  return readFileSync(join(GOLDEN, name), "utf-8");
}

/** Pull one curve's y pixel values out of the rendered SVG. */
function curveYs(svg: string, label: string, panel: number): number[] {
  const re = new RegExp(`<polyline data-label="${label}" points="([^"]+)"`, "g");
  const matches = [...svg.matchAll(re)];
  const pts = matches[panel][1].split(" ");
  return pts.map((p) => Number(p.split(",")[1]));
}

describe("velocity figure", () => {
  const csvText = readGolden("benchmark_velocity.csv");
  const csv = parseBenchmarkCsv(csvText);
  const svg = velocityFigure(csv);

  it("regenerates the committed figure byte for byte", () => {
    expect(svg).toBe(readGolden("velocity.svg"));
  });

  it("is a pure function of the CSV", () => {
    expect(velocityFigure(parseBenchmarkCsv(csvText))).toBe(svg);
  });

  it("v2 panel visually shows the wt <= w <= {txy, txyz} ordering", () => {
    // larger error = smaller y pixel coordinate is false: the y axis points
    // down, so larger error means smaller 'y' value on screen -> compare
    // underlying medians from the CSV at the sweep points >= 15 deg/frame,
    // then confirm the drawn points respect the same order
    const m6 = aggregate(csv.records, "6dof", "v2", "omegaDegPerFrame");
    const mr = aggregate(csv.records, "rot", "v2", "omegaDegPerFrame");
    const mtxy = aggregate(csv.records, "txy", "v2", "omegaDegPerFrame");
    const mtxyz = aggregate(csv.records, "txyz", "v2", "omegaDegPerFrame");
    for (let i = 0; i < m6.length; i++) {
      if (m6[i].x < 15) continue;
      expect(m6[i].y).toBeLessThanOrEqual(mr[i].y);
      expect(mr[i].y).toBeLessThanOrEqual(mtxy[i].y);
      expect(mr[i].y).toBeLessThanOrEqual(mtxyz[i].y);
    }
    // drawn curves: y pixels grow downward, so lower error = larger y
    const y6 = curveYs(svg, "wt", 1);
    const yr = curveYs(svg, "w", 1);
    const ytxy = curveYs(svg, "txy", 1);
    const xs = m6.map((p) => p.x);
    for (let i = 0; i < xs.length; i++) {
      if (xs[i] < 15) continue;
      expect(y6[i]).toBeGreaterThanOrEqual(yr[i] - 1e-9);
      expect(yr[i]).toBeGreaterThanOrEqual(ytxy[i] - 1e-9);
    }
  });

  it("carries run metadata in the caption", () => {
    expect(svg).toContain("sigma_px=");
    expect(svg).toContain("seed=");
  });
});

describe("baseline figure", () => {
  const csvText = readGolden("benchmark_baseline.csv");
  const svg = baselineFigure(parseBenchmarkCsv(csvText));

  it("regenerates the committed figure byte for byte", () => {
    expect(svg).toBe(readGolden("baseline.svg"));
  });

  it("includes the known-baseline solver curve", () => {
    expect(svg).toContain('data-label="wt (known b)"');
  });
});

describe("error handling", () => {
  it("an empty CSV fails loudly", () => {
    expect(() => velocityFigure(parseBenchmarkCsv(""))).toThrow();
  });

  it("a single-solver CSV yields a single curve per panel", () => {
    const header =
      "solver,variant,omega_deg_per_frame,trans_frac_per_frame,sigma_px," +
      "baseline_ratio,seed,median_err_px,mean_err_px,p90_err_px,runtime_us";
    const rows = [0, 15, 30].flatMap((o) =>
      ["v1", "v2"].map((v) => `rot,${v},${o},0.02,0.5,0,0,1.0,1.0,1.0,0`),
    );
    const svg2 = velocityFigure(parseBenchmarkCsv([header, ...rows].join("\n")));
    const curves = [...svg2.matchAll(/<polyline data-label=/g)];
    expect(curves).toHaveLength(2); // one per panel
  });
});
