/**
 * Session state for the planner loop. All transitions are pure functions so
 * the UI is a snapshot of state plus fetched data.
 */

import type { GenerationRequest, GenerationResponse } from "./types.js";

export interface HistoryEntry {
  request: GenerationRequest;
  response: GenerationResponse;
  timestamp: string;
}

export interface UiState {
  selectedLevel: number;
  selectedContext: number | "custom";
  selectedCategory: number | "all";
  compareTarget: number | null;
  inFlight: boolean;
  history: HistoryEntry[];
}

export function initialState(): UiState {
  return {
    selectedLevel: 0,
    selectedContext: "custom",
    selectedCategory: "all",
    compareTarget: null,
    inFlight: false,
    history: [],
  };
}

export function selectLevel(state: UiState, level: number, levelCount: number): UiState {
  if (!Number.isInteger(level) || level < 0 || level >= levelCount) return state;
  return { ...state, selectedLevel: level };
}

export function selectContext(state: UiState, context: number | "custom"): UiState {
  return { ...state, selectedContext: context };
}

export function selectCategory(state: UiState, category: number | "all"): UiState {
  return { ...state, selectedCategory: category };
}

export function setCompareTarget(state: UiState, target: number | null): UiState {
  return { ...state, compareTarget: target };
}

export function beginGeneration(state: UiState): UiState {
  return { ...state, inFlight: true };
}

/** History is append-only within a session. */
export function completeGeneration(state: UiState, entry: HistoryEntry): UiState {
  return { ...state, inFlight: false, history: [...state.history, entry] };
}

export function failGeneration(state: UiState): UiState {
  return { ...state, inFlight: false };
}
