/**
 * Minimal deterministic SVG line charts: identical input produces an
 * identical file, byte for byte (fixed number formatting, no timestamps).
 */

export interface Curve {
  label: string;
  color: string;
  dash?: string;
  points: { x: number; y: number }[];
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  curves: Curve[];
  yMax?: number;
}

const W = 460;
const H = 360;
const MARGIN = { left: 58, right: 16, top: 34, bottom: 66 };

function fmt(v: number): string {
  return v.toFixed(2);
}

function niceTicks(max: number, n = 5): number[] {
  if (max <= 0) return [0, 1];
  const raw = max / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= raw) ?? mag * 10;
  const out: number[] = [];
  for (let v = 0; v <= max + 1e-9; v += step) out.push(Number(v.toPrecision(10)));
  return out;
}

function renderPanel(panel: Panel, ox: number): string {
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const xs = panel.curves.flatMap((c) => c.points.map((p) => p.x));
  const ys = panel.curves.flatMap((c) => c.points.map((p) => p.y));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMax = panel.yMax ?? Math.max(...ys) * 1.08;
  const toX = (x: number) =>
    ox + MARGIN.left + ((x - xMin) / Math.max(xMax - xMin, 1e-12)) * plotW;
  const toY = (y: number) => MARGIN.top + (1 - y / yMax) * plotH;

  const parts: string[] = [];
  parts.push(
    `<rect x="${fmt(ox + MARGIN.left)}" y="${fmt(MARGIN.top)}" width="${fmt(
      plotW,
    )}" height="${fmt(plotH)}" fill="none" stroke="#444" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${fmt(ox + MARGIN.left + plotW / 2)}" y="${fmt(
      MARGIN.top - 12,
    )}" text-anchor="middle" font-size="14" fill="#111">${panel.title}</text>`,
  );
  for (const t of niceTicks(yMax)) {
    const y = toY(t);
    parts.push(
      `<line x1="${fmt(ox + MARGIN.left)}" y1="${fmt(y)}" x2="${fmt(
        ox + MARGIN.left + plotW,
      )}" y2="${fmt(y)}" stroke="#ddd" stroke-width="0.5"/>`,
      `<text x="${fmt(ox + MARGIN.left - 6)}" y="${fmt(
        y + 3.5,
      )}" text-anchor="end" font-size="10" fill="#333">${t}</text>`,
    );
  }
  const xTicks = [...new Set(xs)].sort((a, b) => a - b);
  for (const t of xTicks) {
    const x = toX(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(MARGIN.top + plotH)}" x2="${fmt(x)}" y2="${fmt(
        MARGIN.top + plotH + 4,
      )}" stroke="#444" stroke-width="1"/>`,
      `<text x="${fmt(x)}" y="${fmt(
        MARGIN.top + plotH + 16,
      )}" text-anchor="middle" font-size="10" fill="#333">${Number(
        t.toPrecision(4),
      )}</text>`,
    );
  }
  parts.push(
    `<text x="${fmt(ox + MARGIN.left + plotW / 2)}" y="${fmt(
      MARGIN.top + plotH + 32,
    )}" text-anchor="middle" font-size="12" fill="#111">${panel.xLabel}</text>`,
    `<text transform="translate(${fmt(ox + 14)},${fmt(
      MARGIN.top + plotH / 2,
    )}) rotate(-90)" text-anchor="middle" font-size="12" fill="#111">${panel.yLabel}</text>`,
  );
  panel.curves.forEach((curve, ci) => {
    const pts = curve.points
      .map((p) => `${fmt(toX(p.x))},${fmt(toY(Math.min(p.y, yMax)))}`)
      .join(" ");
    const dash = curve.dash ? ` stroke-dasharray="${curve.dash}"` : "";
    parts.push(
      `<polyline data-label="${curve.label}" points="${pts}" fill="none" stroke="${curve.color}" stroke-width="1.8"${dash}/>`,
    );
    for (const p of curve.points) {
      parts.push(
        `<circle cx="${fmt(toX(p.x))}" cy="${fmt(
          toY(Math.min(p.y, yMax)),
        )}" r="2.2" fill="${curve.color}"/>`,
      );
    }
    const ly = MARGIN.top + 14 + ci * 14;
    parts.push(
      `<line x1="${fmt(ox + MARGIN.left + 8)}" y1="${fmt(ly - 3)}" x2="${fmt(
        ox + MARGIN.left + 28,
      )}" y2="${fmt(ly - 3)}" stroke="${curve.color}" stroke-width="1.8"${dash}/>`,
      `<text x="${fmt(ox + MARGIN.left + 33)}" y="${fmt(
        ly,
      )}" font-size="10" fill="#111">${curve.label}</text>`,
    );
  });
  return parts.join("\n");
}

export function renderFigure(panels: Panel[], caption: string): string {
  const width = W * panels.length;
  const parts = [
    `<?xml version="1.0" encoding="UTF-8"?>`,
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${H}" ` +
      `viewBox="0 0 ${width} ${H}" font-family="Helvetica,Arial,sans-serif">`,
    `<rect width="${width}" height="${H}" fill="white"/>`,
  ];
  panels.forEach((p, i) => parts.push(renderPanel(p, i * W)));
  parts.push(
    `<text x="${fmt(width / 2)}" y="${fmt(
      H - 8,
    )}" text-anchor="middle" font-size="9" fill="#666">${caption}</text>`,
    `</svg>`,
    ``,
  );
  return parts.join("\n");
}
