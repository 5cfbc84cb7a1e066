/** DOM rendering for the studio: palette cards, attention strips, colorize panel. */

import type { GalleryEntry, SampleResponse } from "./api.js";
import { labToHex } from "./color.js";
import { canColorize, type StudioState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function formatLab(row: [number, number, number]): string {
  return `L ${row[0].toFixed(1)}  a ${row[1].toFixed(1)}  b ${row[2].toFixed(1)}`;
}

/** One strip per color slot: token weights as proportional segments. */
function attentionStrip(tokens: string[], weights: number[]): HTMLElement {
  const strip = el("div", "attention-strip");
  weights.forEach((weight, index) => {
    const segment = el("span", "attention-segment");
    segment.style.width = `${(weight * 100).toFixed(2)}%`;
    const token = tokens[index] ?? "?";
    segment.title = `${token}: ${weight.toFixed(3)}`;
    segment.dataset.token = token;
    segment.dataset.weight = weight.toFixed(6);
    strip.appendChild(segment);
  });
  return strip;
}

export function renderPaletteCards(
  container: HTMLElement,
  sample: SampleResponse,
  selected: number | null,
  onSelect: (index: number) => void,
): void {
  container.replaceChildren();
  sample.palettes.forEach((palette, index) => {
    const card = el("article", "palette-card" + (selected === index ? " selected" : ""));
    card.dataset.index = String(index);
    const swatches = el("div", "swatches");
    palette.hex.forEach((hex, slot) => {
      const swatch = el("div", "swatch");
      swatch.style.backgroundColor = hex;
      const lab = palette.lab[slot];
      swatch.title = lab ? `${hex}  ${formatLab(lab)}` : hex;
      const slotAttention = sample.attention[index]?.[slot];
      if (slotAttention) swatch.appendChild(attentionStrip(sample.tokens, slotAttention));
      swatches.appendChild(swatch);
    });
    card.appendChild(swatches);
    const caption = el("footer", "card-caption", `palette ${index + 1}`);
    card.appendChild(caption);
    card.addEventListener("click", () => onSelect(index));
    container.appendChild(card);
  });
}

export function renderErrorBanner(banner: HTMLElement, error: string | null): void {
  banner.textContent = error ?? "";
  banner.classList.toggle("visible", error !== null);
}

export function renderControls(
  controls: { generate: HTMLButtonElement; colorize: HTMLButtonElement },
  state: StudioState,
): void {
  controls.generate.disabled = state.busy !== "idle";
  controls.colorize.disabled = !canColorize(state);
}

export function renderResult(
  panel: { after: HTMLImageElement; download: HTMLAnchorElement },
  state: StudioState,
): void {
  if (state.resultUrl) {
    panel.after.src = state.resultUrl;
    panel.download.href = state.resultUrl;
    panel.download.classList.remove("hidden");
  } else {
    panel.download.classList.add("hidden");
  }
}

export function renderGallery(container: HTMLElement, entries: GalleryEntry[]): void {
  container.replaceChildren();
  if (entries.length === 0) {
    container.appendChild(el("p", "gallery-empty", "Nothing colorized yet."));
    return;
  }
  for (const entry of entries) {
    const row = el("article", "gallery-row");
    row.dataset.id = entry.id;
    const strip = el("div", "gallery-swatches");
    for (const lab of entry.palette) {
      const chip = el("span", "gallery-chip");
      chip.style.backgroundColor = labToHex(lab);
      chip.title = formatLab(lab);
      strip.appendChild(chip);
    }
    row.appendChild(strip);
    row.appendChild(el("div", "gallery-text", entry.text || "(no prompt)"));
    row.appendChild(el("time", "gallery-time", entry.timestamp));
    container.appendChild(row);
  }
}
