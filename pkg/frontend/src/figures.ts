/** Figure builders: velocity sweep (two panels) and baseline sweep. */

import { aggregate, BenchmarkCsv } from "./csv.js";
import { Curve, Panel, renderFigure } from "./svg.js";

export const SOLVER_STYLE: Record<string, { color: string; label: string }> = {
  interp: { color: "#d62728", label: "interp" },
  txy: { color: "#2ca02c", label: "txy" },
  txyz: { color: "#1f77b4", label: "txyz" },
  rot: { color: "#17becf", label: "w" },
  "6dof": { color: "#c317cf", label: "wt" },
  "6dof-baseline": { color: "#111111", label: "wt (known b)" },
};

function curvesFor(
  csv: BenchmarkCsv,
  solvers: string[],
  variant: string,
  xField: "omegaDegPerFrame" | "baselineRatio",
): Curve[] {
  const out: Curve[] = [];
  for (const solver of solvers) {
    const pts = aggregate(
      csv.records,
      solver,
      solver === "interp" ? "-" : variant,
      xField,
    );
    if (pts.length === 0) continue;
    const style = SOLVER_STYLE[solver] ?? { color: "#777", label: solver };
    out.push({
      label: style.label,
      color: style.color,
      dash: solver === "interp" ? "4,3" : undefined,
      points: pts,
    });
  }
  return out;
}

function caption(csv: BenchmarkCsv): string {
  const m = csv.metadata;
  const keys = ["sigma_px", "focal_px", "n_points", "iters", "seed", "scenes"];
  const parts = keys
    .filter((k) => k in m)
    .map((k) => `${k}=${m[k]}`);
  return parts.join("  ");
}

export function velocityFigure(csv: BenchmarkCsv): string {
  const solvers = ["interp", "txy", "txyz", "rot", "6dof"];
  const ys = csv.records
    .filter((r) => r.medianErrPx < 1e5)
    .map((r) => r.medianErrPx);
  const yMax = Math.min(Math.max(...ys) * 1.05, 60);
  const panels: Panel[] = [
    {
      title: "per-correspondence fit (v1)",
      xLabel: "angular velocity [deg/frame]",
      yLabel: "median undistortion error [px]",
      curves: curvesFor(csv, solvers, "v1", "omegaDegPerFrame"),
      yMax,
    },
    {
      title: "single model per image (v2)",
      xLabel: "angular velocity [deg/frame]",
      yLabel: "median undistortion error [px]",
      curves: curvesFor(csv, solvers, "v2", "omegaDegPerFrame"),
      yMax,
    },
  ];
  return renderFigure(panels, caption(csv));
}

export function baselineFigure(csv: BenchmarkCsv): string {
  const solvers = ["interp", "txy", "txyz", "rot", "6dof", "6dof-baseline"];
  const panel: Panel = {
    title: "error vs baseline-to-depth ratio (v2)",
    xLabel: "baseline / min depth",
    yLabel: "median undistortion error [px]",
    curves: curvesFor(csv, solvers, "v2", "baselineRatio"),
  };
  return renderFigure([panel], caption(csv));
}
