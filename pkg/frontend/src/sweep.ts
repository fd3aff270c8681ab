/**
 * What-if sweep: one generation per green level with a shared seed so the
 * planner sees the guidance effect (sparsity falling with level) directly.
 */

import type { ApiClient } from "./api.js";
import { buildArgmaxView, type ArgmaxCell } from "./heatmap.js";
import type { GenerationRequest, GenerationResponse } from "./types.js";

export interface SweepPanel {
  level: number;
  totalIntensity: number;
  argmax: ArgmaxCell[];
  response: GenerationResponse;
}

export function sweepRequests(
  context: GenerationRequest["context"],
  seed: number,
  levelCount = 5,
): GenerationRequest[] {
  return Array.from({ length: levelCount }, (_, level) => ({
    green_level: level,
    context,
    count: 1,
    seed,
  }));
}

export async function whatIfSweep(
  api: ApiClient,
  context: GenerationRequest["context"],
  seed: number,
  levelCount = 5,
): Promise<SweepPanel[]> {
  const requests = sweepRequests(context, seed, levelCount);
  const responses = await Promise.all(requests.map((r) => api.generate(r)));
  return responses.map((response, level) => {
    const config = response.configurations[0];
    return {
      level,
      totalIntensity: response.per_category_totals[0].reduce((a, v) => a + v, 0),
      argmax: buildArgmaxView(config),
      response,
    };
  });
}
