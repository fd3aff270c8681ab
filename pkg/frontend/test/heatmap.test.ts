import { describe, expect, it } from "vitest";

import {
  buildArgmaxView,
  buildCategoryHeatmaps,
  categoryTotals,
  maxCellValue,
  rampColor,
} from "../src/heatmap.js";

// 2x2 grid, 3 categories
const config = [
  [
    [4, 0, 1],
    [0, 2, 0],
  ],
  [
    [1, 1, 1],
    [0, 0, 0],
  ],
];

describe("heatmap render models", () => {
  it("category totals match a manual recount", () => {
    expect(categoryTotals(config)).toEqual([5, 3, 2]);
  });

  it("small multiples are a stable render model", () => {
    expect(buildCategoryHeatmaps(config)).toMatchSnapshot();
  });

  it("argmax view is a stable render model", () => {
    expect(buildArgmaxView(config)).toMatchSnapshot();
  });

  it("shared scale keeps colors comparable across a pair", () => {
    const other = [
      [
        [8, 0, 0],
        [0, 0, 0],
      ],
      [
        [0, 0, 0],
        [0, 0, 0],
      ],
    ];
    const shared = maxCellValue([config, other]);
    expect(shared).toBe(8);
    const ours = buildCategoryHeatmaps(config, shared);
    const solo = buildCategoryHeatmaps(config);
    // value 4 maps to half intensity under the shared scale, full when alone
    expect(ours[0].cells[0].color).toBe(rampColor(4 / 8));
    expect(solo[0].cells[0].color).toBe(rampColor(1));
  });

  it("empty cells stay neutral in the argmax view", () => {
    const view = buildArgmaxView(config);
    const empty = view.find((c) => c.row === 1 && c.col === 1)!;
    expect(empty.total).toBe(0);
    expect(empty.color).toBe("#f6f8fa");
  });

  it("rendering is a pure function of its inputs", () => {
    expect(buildCategoryHeatmaps(config)).toEqual(buildCategoryHeatmaps(config));
    expect(buildArgmaxView(config)).toEqual(buildArgmaxView(config));
  });
});
