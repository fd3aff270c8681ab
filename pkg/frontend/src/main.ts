/** DOM bootstrap: wires the pure render models to the page. */

import { ApiClient } from "./api.js";
import { buildCompareModel } from "./compare.js";
import {
  buildArgmaxView,
  buildCategoryHeatmaps,
  categoryColor,
  type ArgmaxCell,
  type CategoryHeatmap,
} from "./heatmap.js";
import {
  beginGeneration,
  completeGeneration,
  failGeneration,
  initialState,
  selectCategory,
  selectContext,
  selectLevel,
  setCompareTarget,
  type UiState,
} from "./state.js";
import { whatIfSweep } from "./sweep.js";
import { toastFromError, type ToastModel } from "./toast.js";
import type { MetaResponse, SampleRecord } from "./types.js";

const api = new ApiClient();
let state: UiState = initialState();
let meta: MetaResponse | null = null;
let samples: SampleRecord[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showToast(toast: ToastModel): void {
  const host = el<HTMLDivElement>("toasts");
  const node = document.createElement("div");
  node.className = `toast toast-${toast.kind}`;
  const title = document.createElement("strong");
  title.textContent = toast.title;
  node.appendChild(title);
  for (const line of toast.lines) {
    const p = document.createElement("div");
    p.textContent = line;
    node.appendChild(p);
  }
  host.appendChild(node);
  setTimeout(() => node.remove(), 6000);
}

function drawCellGrid(canvas: HTMLCanvasElement, n: number, cells: { row: number; col: number; color: string }[]): void {
  const px = Math.max(3, Math.floor(120 / n));
  canvas.width = n * px;
  canvas.height = n * px;
  const ctx = canvas.getContext("2d")!;
  for (const cell of cells) {
    ctx.fillStyle = cell.color;
    ctx.fillRect(cell.col * px, cell.row * px, px, px);
  }
}

function renderHeatmaps(host: HTMLElement, maps: CategoryHeatmap[], n: number, only: number | "all"): void {
  host.replaceChildren();
  for (const map of maps) {
    if (only !== "all" && map.category !== only) continue;
    const panel = document.createElement("figure");
    panel.className = "heatmap";
    const canvas = document.createElement("canvas");
    drawCellGrid(canvas, n, map.cells);
    const caption = document.createElement("figcaption");
    caption.textContent = `cat ${map.category} · ${map.total.toFixed(1)}`;
    panel.append(canvas, caption);
    host.appendChild(panel);
  }
}

function renderArgmax(host: HTMLElement, cells: ArgmaxCell[], n: number, label: string): void {
  const panel = document.createElement("figure");
  panel.className = "heatmap";
  const canvas = document.createElement("canvas");
  drawCellGrid(canvas, n, cells);
  const caption = document.createElement("figcaption");
  caption.textContent = label;
  panel.append(canvas, caption);
  host.appendChild(panel);
}

function renderTotalsBar(host: HTMLElement, totals: number[]): void {
  host.replaceChildren();
  const peak = Math.max(...totals, 1);
  totals.forEach((value, cat) => {
    const bar = document.createElement("div");
    bar.className = "bar";
    bar.style.height = `${Math.round((value / peak) * 60) + 2}px`;
    bar.style.background = categoryColor(cat);
    bar.title = `cat ${cat}: ${value.toFixed(1)}`;
    host.appendChild(bar);
  });
}

function currentContext(): { sample_id?: number; features?: number[][] } {
  if (state.selectedContext === "custom") {
    const text = el<HTMLTextAreaElement>("custom-features").value.trim();
    return { features: JSON.parse(text) as number[][] };
  }
  return { sample_id: state.selectedContext };
}

function seedInput(): number | undefined {
  const raw = el<HTMLInputElement>("seed").value.trim();
  return raw === "" ? undefined : Number(raw);
}

async function refreshSamples(): Promise<void> {
  if (!meta) return;
  try {
    const res = await api.loadSamples(state.selectedLevel, 12);
    samples = res.samples;
    const picker = el<HTMLSelectElement>("context");
    picker.replaceChildren();
    const custom = document.createElement("option");
    custom.value = "custom";
    custom.textContent = "custom features";
    picker.appendChild(custom);
    for (const sample of samples) {
      const opt = document.createElement("option");
      opt.value = String(sample.id);
      opt.textContent = `sample ${sample.id} (level ${sample.level})`;
      picker.appendChild(opt);
    }
    if (samples.length) {
      state = selectContext(state, samples[0].id);
      picker.value = String(samples[0].id);
    }
    const compare = el<HTMLSelectElement>("compare-target");
    compare.replaceChildren();
    for (const sample of samples) {
      const opt = document.createElement("option");
      opt.value = String(sample.id);
      opt.textContent = `original ${sample.id}`;
      compare.appendChild(opt);
    }
    if (samples.length) state = setCompareTarget(state, samples[0].id);
  } catch (err) {
    showToast(toastFromError(err));
  }
}

async function onGenerate(): Promise<void> {
  if (!meta || state.inFlight) return;
  const button = el<HTMLButtonElement>("generate");
  state = beginGeneration(state);
  button.disabled = true;
  try {
    const request = {
      green_level: state.selectedLevel,
      context: currentContext(),
      count: 1,
      seed: seedInput(),
    };
    const response = await api.generate(request);
    state = completeGeneration(state, {
      request,
      response,
      timestamp: new Date().toISOString(),
    });
    const config = response.configurations[0];
    const n = meta.dims.n;
    renderHeatmaps(el("generated-heatmaps"), buildCategoryHeatmaps(config), n, state.selectedCategory);
    el("generated-argmax").replaceChildren();
    renderArgmax(el("generated-argmax"), buildArgmaxView(config), n, `level ${state.selectedLevel}`);
    renderTotalsBar(el("generated-totals"), response.per_category_totals[0]);
    renderHistory();
    renderCompare(config);
  } catch (err) {
    state = failGeneration(state);
    showToast(toastFromError(err));
  } finally {
    button.disabled = false;
  }
}

function renderCompare(config: number[][][]): void {
  if (!meta || state.compareTarget === null) return;
  const original = samples.find((s) => s.id === state.compareTarget);
  if (!original) return;
  const model = buildCompareModel(config, original.config);
  const host = el("compare-panel");
  host.replaceChildren();
  const left = document.createElement("div");
  const right = document.createElement("div");
  renderHeatmaps(left, model.generated, meta.dims.n, state.selectedCategory);
  renderHeatmaps(right, model.original, meta.dims.n, state.selectedCategory);
  host.append(left, right);
  el("compare-metrics").textContent =
    `KL ${model.distances.kl.toFixed(5)} · JS ${model.distances.js.toFixed(5)} · ` +
    `HD ${model.distances.hd.toFixed(5)} · Cos ${model.distances.cos.toFixed(5)}`;
  const diffs = model.perCategoryAbsDiff
    .map((d, c) => `c${c}:${d.toFixed(1)}`)
    .join("  ");
  el("compare-diff").textContent = `|Δ| per category — ${diffs}`;
}

async function onSweep(): Promise<void> {
  if (!meta) return;
  const seed = seedInput() ?? 1;
  try {
    const panels = await whatIfSweep(api, currentContext(), seed, meta.levels);
    const host = el("sweep-panel");
    host.replaceChildren();
    for (const panel of panels) {
      renderArgmax(host, panel.argmax, meta.dims.n, `level ${panel.level} · ${panel.totalIntensity.toFixed(0)}`);
    }
  } catch (err) {
    showToast(toastFromError(err));
  }
}

function renderHistory(): void {
  const host = el("history");
  host.replaceChildren();
  for (const entry of [...state.history].reverse().slice(0, 12)) {
    const row = document.createElement("li");
    const total = entry.response.per_category_totals[0].reduce((a, v) => a + v, 0);
    row.textContent =
      `${entry.timestamp.slice(11, 19)} level ${entry.request.green_level} ` +
      `seed ${entry.response.seed} total ${total.toFixed(0)} (${entry.response.latency_ms.toFixed(0)} ms)`;
    host.appendChild(row);
  }
}

async function boot(): Promise<void> {
  try {
    meta = await api.loadMeta();
  } catch (err) {
    const banner = el("banner");
    banner.textContent = "Service unavailable: model is not loaded yet.";
    banner.classList.add("error");
    showToast(toastFromError(err));
    return;
  }
  el("banner").textContent = `variant ${meta.variant} · grid ${meta.dims.n}×${meta.dims.n} · ${meta.dims.m} categories`;
  const levelPicker = el<HTMLSelectElement>("level");
  for (let j = 0; j < meta.levels; j++) {
    const opt = document.createElement("option");
    opt.value = String(j);
    opt.textContent = `Green${j}`;
    levelPicker.appendChild(opt);
  }
  const categoryPicker = el<HTMLSelectElement>("category");
  const all = document.createElement("option");
  all.value = "all";
  all.textContent = "all categories";
  categoryPicker.appendChild(all);
  for (let c = 0; c < meta.dims.m; c++) {
    const opt = document.createElement("option");
    opt.value = String(c);
    opt.textContent = `category ${c}`;
    categoryPicker.appendChild(opt);
  }

  levelPicker.addEventListener("change", async () => {
    state = selectLevel(state, Number(levelPicker.value), meta!.levels);
    await refreshSamples();
  });
  categoryPicker.addEventListener("change", () => {
    const value = categoryPicker.value === "all" ? "all" : Number(categoryPicker.value);
    state = selectCategory(state, value);
  });
  el<HTMLSelectElement>("context").addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    state = selectContext(state, value === "custom" ? "custom" : Number(value));
  });
  el<HTMLSelectElement>("compare-target").addEventListener("change", (ev) => {
    state = setCompareTarget(state, Number((ev.target as HTMLSelectElement).value));
  });
  el<HTMLButtonElement>("generate").addEventListener("click", () => void onGenerate());
  el<HTMLButtonElement>("sweep").addEventListener("click", () => void onSweep());
  await refreshSamples();
}

void boot();
