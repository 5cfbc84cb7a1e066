/** Wires the API client, state transitions, and renderers to the page. */

import { ApiError, PaletteApi } from "./api.js";
import * as state from "./state.js";
import {
  renderControls,
  renderErrorBanner,
  renderGallery,
  renderPaletteCards,
  renderResult,
} from "./render.js";

const MAX_UPLOAD_BYTES = 5 * 1024 * 1024;

function must<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function startApp(api: PaletteApi = new PaletteApi()): void {
  let current = state.initialState();
  let uploadedFile: File | null = null;

  const promptInput = must<HTMLInputElement>("prompt");
  const countInput = must<HTMLInputElement>("count");
  const seedInput = must<HTMLInputElement>("seed");
  const generateButton = must<HTMLButtonElement>("generate");
  const colorizeButton = must<HTMLButtonElement>("colorize");
  const fileInput = must<HTMLInputElement>("image-file");
  const banner = must<HTMLElement>("error-banner");
  const cards = must<HTMLElement>("palette-cards");
  const before = must<HTMLImageElement>("before-image");
  const after = must<HTMLImageElement>("after-image");
  const download = must<HTMLAnchorElement>("download-link");
  const galleryList = must<HTMLElement>("gallery-list");
  const studioTab = must<HTMLButtonElement>("tab-studio");
  const galleryTab = must<HTMLButtonElement>("tab-gallery");
  const studioPanel = must<HTMLElement>("studio-panel");
  const galleryPanel = must<HTMLElement>("gallery-panel");

  function redraw(): void {
    renderErrorBanner(banner, current.error);
    renderControls({ generate: generateButton, colorize: colorizeButton }, current);
    if (current.sample) {
      renderPaletteCards(cards, current.sample, current.selected, (index) => {
        current = state.selectPalette(current, index);
        redraw();
      });
    }
    renderResult({ after, download }, current);
  }

  function report(err: unknown): string {
    if (err instanceof ApiError) return err.message;
    return err instanceof Error ? err.message : String(err);
  }

  generateButton.addEventListener("click", async () => {
    const text = promptInput.value.trim();
    if (!text) {
      current = state.setError(current, "Type a prompt first.");
      redraw();
      return;
    }
    current = state.beginSample(current);
    const token = current.requestToken;
    redraw();
    try {
      const count = Math.min(20, Math.max(1, Number(countInput.value) || 5));
      const seedRaw = seedInput.value.trim();
      const seed = seedRaw === "" ? undefined : Number(seedRaw);
      const sample = await api.samplePalettes(text, count, seed);
      current = state.applySample(current, token, sample);
      if (sample.all_tokens_unknown) {
        current = state.setError(current, "No word in the prompt is in the model vocabulary; palettes are unconditioned.");
      }
    } catch (err) {
      current = state.failSample(current, token, report(err));
    }
    redraw();
  });

  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0] ?? null;
    if (!file) return;
    if (file.size > MAX_UPLOAD_BYTES) {
      uploadedFile = null;
      current = state.setImage(current, null);
      current = state.setError(current, `Image is ${(file.size / 1024 / 1024).toFixed(1)} MiB; the limit is 5 MiB.`);
      redraw();
      return;
    }
    uploadedFile = file;
    before.src = URL.createObjectURL(file);
    current = { ...state.setImage(current, file.name), error: null };
    redraw();
  });

  colorizeButton.addEventListener("click", async () => {
    if (!state.canColorize(current) || !uploadedFile || current.selected === null) return;
    const palette = current.sample?.palettes[current.selected];
    if (!palette) return;
    current = state.beginColorize(current);
    redraw();
    try {
      const result = await api.colorize(uploadedFile, uploadedFile.name, palette.lab, promptInput.value.trim());
      const url = URL.createObjectURL(result.blob);
      current = state.applyColorize(current, url, result.galleryId);
    } catch (err) {
      current = state.failColorize(current, report(err));
    }
    redraw();
  });

  async function openGallery(): Promise<void> {
    studioPanel.classList.add("hidden");
    galleryPanel.classList.remove("hidden");
    studioTab.classList.remove("active");
    galleryTab.classList.add("active");
    try {
      renderGallery(galleryList, await api.gallery());
    } catch (err) {
      current = state.setError(current, report(err));
      redraw();
    }
  }

  function openStudio(): void {
    galleryPanel.classList.add("hidden");
    studioPanel.classList.remove("hidden");
    galleryTab.classList.remove("active");
    studioTab.classList.add("active");
  }

  galleryTab.addEventListener("click", () => void openGallery());
  studioTab.addEventListener("click", openStudio);

  redraw();
}

if (typeof document !== "undefined" && document.getElementById("studio-panel")) {
  startApp();
}
