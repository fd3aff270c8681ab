/**
 * Pure render-model builders for configuration heatmaps.
 *
 * A configuration renders either as per-category small multiples (one N x N
 * heatmap per category, shared color scale across a comparison pair) or as a
 * single argmax view coloring each cell by its dominant category with
 * intensity from the cell total.
 */

export interface HeatmapCell {
  row: number;
  col: number;
  value: number;
  color: string;
}

export interface CategoryHeatmap {
  category: number;
  total: number;
  cells: HeatmapCell[];
}

export interface ArgmaxCell {
  row: number;
  col: number;
  category: number;
  total: number;
  color: string;
}

/** 10-color categorical palette, cycled for higher category indices. */
export const CATEGORY_PALETTE = [
  "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951",
  "#ff8ab7", "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0",
];

export function categoryColor(category: number): string {
  return CATEGORY_PALETTE[category % CATEGORY_PALETTE.length];
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

/** Monochrome ramp from near-white to the given hue, t in [0, 1]. */
export function rampColor(t: number, hue = "#4269d0"): string {
  const target = [
    parseInt(hue.slice(1, 3), 16),
    parseInt(hue.slice(3, 5), 16),
    parseInt(hue.slice(5, 7), 16),
  ];
  const from = [246, 248, 250];
  const mix = from.map((f, i) => Math.round(f + (target[i] - f) * clamp01(t)));
  return `#${mix.map((v) => v.toString(16).padStart(2, "0")).join("")}`;
}

export function categoryTotals(config: number[][][]): number[] {
  const m = config[0][0].length;
  const totals = new Array<number>(m).fill(0);
  for (const row of config) {
    for (const cell of row) {
      for (let c = 0; c < m; c++) totals[c] += cell[c];
    }
  }
  return totals;
}

/**
 * Per-category small multiples. `scaleMax` fixes the color scale; pass the
 * max over both sides of a comparison pair so the panels are comparable.
 */
export function buildCategoryHeatmaps(config: number[][][], scaleMax?: number): CategoryHeatmap[] {
  const n = config.length;
  const m = config[0][0].length;
  let peak = scaleMax ?? 0;
  if (scaleMax === undefined) {
    for (const row of config) for (const cell of row) for (const v of cell) peak = Math.max(peak, v);
  }
  const denom = peak > 0 ? peak : 1;
  const maps: CategoryHeatmap[] = [];
  for (let c = 0; c < m; c++) {
    const cells: HeatmapCell[] = [];
    let total = 0;
    for (let r = 0; r < n; r++) {
      for (let col = 0; col < n; col++) {
        const value = config[r][col][c];
        total += value;
        cells.push({ row: r, col, value, color: rampColor(value / denom) });
      }
    }
    maps.push({ category: c, total, cells });
  }
  return maps;
}

/** Argmax-category view: one cell per grid square, colored by dominant category. */
export function buildArgmaxView(config: number[][][]): ArgmaxCell[] {
  const n = config.length;
  let peakTotal = 0;
  const prepared: { row: number; col: number; category: number; total: number }[] = [];
  for (let r = 0; r < n; r++) {
    for (let col = 0; col < n; col++) {
      const counts = config[r][col];
      let best = 0;
      let total = 0;
      for (let c = 0; c < counts.length; c++) {
        total += counts[c];
        if (counts[c] > counts[best]) best = c;
      }
      peakTotal = Math.max(peakTotal, total);
      prepared.push({ row: r, col, category: best, total });
    }
  }
  const denom = peakTotal > 0 ? peakTotal : 1;
  return prepared.map((p) => ({
    ...p,
    color: p.total === 0 ? "#f6f8fa" : blend(categoryColor(p.category), p.total / denom),
  }));
}

function blend(hex: string, t: number): string {
  return rampColor(t, hex);
}

export function maxCellValue(configs: number[][][][]): number {
  let peak = 0;
  for (const config of configs) {
    for (const row of config) for (const cell of row) for (const v of cell) peak = Math.max(peak, v);
  }
  return peak;
}
