/**
 * Side-by-side comparison of a generated configuration against an original
 * sample: shared-scale heatmaps, per-category absolute differences, and the
 * four distribution distances computed client-side.
 */

import { buildCategoryHeatmaps, categoryTotals, maxCellValue, type CategoryHeatmap } from "./heatmap.js";
import { distancePanel, type DistancePanel } from "./metrics.js";

export interface CompareModel {
  generated: CategoryHeatmap[];
  original: CategoryHeatmap[];
  perCategoryAbsDiff: number[];
  distances: DistancePanel;
  sharedScaleMax: number;
}

export function buildCompareModel(generated: number[][][], original: number[][][]): CompareModel {
  const sharedScaleMax = maxCellValue([generated, original]);
  const generatedTotals = categoryTotals(generated);
  const originalTotals = categoryTotals(original);
  return {
    generated: buildCategoryHeatmaps(generated, sharedScaleMax),
    original: buildCategoryHeatmaps(original, sharedScaleMax),
    perCategoryAbsDiff: generatedTotals.map((v, i) => Math.abs(v - originalTotals[i])),
    distances: distancePanel(originalTotals, generatedTotals),
    sharedScaleMax,
  };
}
