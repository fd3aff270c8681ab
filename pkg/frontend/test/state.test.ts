import { describe, expect, it } from "vitest";

import {
  beginGeneration,
  completeGeneration,
  failGeneration,
  initialState,
  selectCategory,
  selectLevel,
  setCompareTarget,
} from "../src/state.js";
import type { GenerationRequest, GenerationResponse } from "../src/types.js";

const request: GenerationRequest = { green_level: 2, context: { sample_id: 3 }, count: 1, seed: 7 };
const response: GenerationResponse = {
  configurations: [[[[1]]]],
  per_category_totals: [[1]],
  latency_ms: 4.2,
  seed: 7,
};

describe("ui state transitions", () => {
  it("rejects out-of-range levels", () => {
    const state = initialState();
    expect(selectLevel(state, 9, 5)).toBe(state);
    expect(selectLevel(state, -1, 5)).toBe(state);
    expect(selectLevel(state, 3, 5).selectedLevel).toBe(3);
  });

  it("history is append-only and immutable", () => {
    let state = initialState();
    state = beginGeneration(state);
    expect(state.inFlight).toBe(true);
    const afterOne = completeGeneration(state, { request, response, timestamp: "t1" });
    const afterTwo = completeGeneration(afterOne, { request, response, timestamp: "t2" });
    expect(afterOne.history).toHaveLength(1);
    expect(afterTwo.history).toHaveLength(2);
    expect(afterTwo.history[0].timestamp).toBe("t1");
    expect(afterTwo.inFlight).toBe(false);
  });

  it("failGeneration clears the in-flight flag without touching history", () => {
    const state = failGeneration(beginGeneration(initialState()));
    expect(state.inFlight).toBe(false);
    expect(state.history).toHaveLength(0);
  });

  it("category and compare selections update", () => {
    let state = initialState();
    state = selectCategory(state, 4);
    state = setCompareTarget(state, 12);
    expect(state.selectedCategory).toBe(4);
    expect(state.compareTarget).toBe(12);
  });
});
