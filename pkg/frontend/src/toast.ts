/** Non-blocking error presentation derived from server error bodies. */

import { ApiError } from "./api.js";

export interface ToastModel {
  kind: "error" | "info";
  title: string;
  lines: string[];
}

export function toastFromError(err: unknown): ToastModel {
  if (err instanceof ApiError) {
    const lines =
      err.body.fields?.map((f) => `${f.field}: ${f.message}`) ?? [err.body.message];
    const titles: Record<number, string> = {
      400: "Request rejected",
      404: "Not found",
      503: "Model still loading",
    };
    return { kind: "error", title: titles[err.status] ?? `Error ${err.status}`, lines };
  }
  if (err instanceof Error) {
    return { kind: "error", title: "Request failed", lines: [err.message] };
  }
  return { kind: "error", title: "Request failed", lines: [String(err)] };
}
