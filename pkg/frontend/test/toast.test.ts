import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { toastFromError } from "../src/toast.js";

function errorFetch(status: number, body: unknown) {
  return () =>
    Promise.resolve(
      new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } }),
    );
}

describe("server error surfaces", () => {
  it("field-level validation errors become toast lines", async () => {
    const api = new ApiClient(
      errorFetch(400, {
        error: "validation",
        message: "request validation failed",
        fields: [
          { field: "green_level", message: "Input should be less than 5" },
          { field: "count", message: "Input should be greater than or equal to 1" },
        ],
      }),
    );
    const err = await api.generate({ green_level: 9, context: {} }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(toastFromError(err)).toMatchSnapshot();
  });

  it("not-found errors surface the message", async () => {
    const api = new ApiClient(errorFetch(404, { error: "not_found", message: "unknown sample id 999" }));
    const err = await api.generate({ green_level: 0, context: { sample_id: 999 } }).catch((e) => e);
    expect(toastFromError(err)).toMatchSnapshot();
  });

  it("loading errors get the 503 title", async () => {
    const api = new ApiClient(errorFetch(503, { error: "loading", message: "model is not loaded yet" }));
    const err = await api.loadMeta().catch((e) => e);
    expect(toastFromError(err)).toMatchSnapshot();
  });

  it("network failures fall back to the error message", () => {
    expect(toastFromError(new Error("fetch failed"))).toEqual({
      kind: "error",
      title: "Request failed",
      lines: ["fetch failed"],
    });
  });
});
