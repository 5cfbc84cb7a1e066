/** Studio state and its pure transitions.
 *
 * Invariants kept by construction:
 *  - `selected` is always null or a valid palette index;
 *  - colorize is only possible with a palette selected, an image loaded,
 *    and no request in flight;
 *  - sample responses are applied latest-wins: a reply for a superseded
 *    request is dropped.
 */

import type { SampleResponse } from "./api.js";

export type Busy = "idle" | "sampling" | "colorizing";

export interface StudioState {
  requestToken: number;
  sample: SampleResponse | null;
  selected: number | null;
  imageName: string | null;
  busy: Busy;
  error: string | null;
  resultUrl: string | null;
  galleryId: string | null;
}

export function initialState(): StudioState {
  return {
    requestToken: 0,
    sample: null,
    selected: null,
    imageName: null,
    busy: "idle",
    error: null,
    resultUrl: null,
    galleryId: null,
  };
}

export function beginSample(state: StudioState): StudioState {
  return { ...state, requestToken: state.requestToken + 1, busy: "sampling", error: null };
}

export function applySample(state: StudioState, token: number, sample: SampleResponse): StudioState {
  if (token !== state.requestToken) return state; // a newer request superseded this reply
  return { ...state, sample, selected: null, busy: "idle", error: null };
}

export function failSample(state: StudioState, token: number, message: string): StudioState {
  if (token !== state.requestToken) return state;
  // keep whatever palettes were already on screen
  return { ...state, busy: "idle", error: message };
}

export function selectPalette(state: StudioState, index: number): StudioState {
  const count = state.sample?.palettes.length ?? 0;
  if (!Number.isInteger(index) || index < 0 || index >= count) return state;
  return { ...state, selected: index };
}

export function setImage(state: StudioState, name: string | null): StudioState {
  return { ...state, imageName: name };
}

export function canColorize(state: StudioState): boolean {
  return state.selected !== null && state.imageName !== null && state.busy === "idle";
}

export function beginColorize(state: StudioState): StudioState {
  if (!canColorize(state)) return state;
  return { ...state, busy: "colorizing", error: null };
}

export function applyColorize(state: StudioState, resultUrl: string, galleryId: string | null): StudioState {
  return { ...state, busy: "idle", resultUrl, galleryId, error: null };
}

export function failColorize(state: StudioState, message: string): StudioState {
  return { ...state, busy: "idle", error: message };
}

export function setError(state: StudioState, message: string): StudioState {
  return { ...state, error: message };
}
