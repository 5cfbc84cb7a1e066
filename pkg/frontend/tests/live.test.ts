// @vitest-environment node
//
// Full loop against a real running service:
//   prompt -> palettes -> pick one -> upload image -> colorize -> download bytes -> gallery
//
// Start a service with toy checkpoints, then:
//   PF_LIVE_BASE=http://127.0.0.1:8123 npm run test:live
import { describe, expect, it } from "vitest";

import { PaletteApi } from "../src/api.js";

const base = process.env.PF_LIVE_BASE;

const TINY_PNG_B64 =
  "iVBORw0KGgoAAAANSUhEUgAAABgAAAAYCAIAAABvFaqvAAAAPElEQVR4nGOUk2vgYGCAIE4Yg1Q2" +
  "JwMDCwMHA1XAYDSIk1oGDT6vjYYRHQ0aDSPCBo2GEWGDhnEYUclrAMxLApYydsKlAAAAAElFTkSuQmCC";

describe.skipIf(!base)("live service loop", () => {
  const api = new PaletteApi(base);

  it("completes prompt -> palettes -> colorize -> download -> gallery", async () => {
    const health = await api.health();
    expect(health.status).toBe("ok");
    expect(health.tpn_loaded).toBe(true);
    expect(health.pcn_loaded).toBe(true);

    const sample = await api.samplePalettes("harbor dusk", 3, 11);
    expect(sample.palettes).toHaveLength(3);
    expect(sample.tokens.length).toBeGreaterThan(0);
    for (const card of sample.palettes) {
      expect(card.lab).toHaveLength(5);
      expect(card.hex).toHaveLength(5);
    }
    // attention rows are normalized per color slot
    for (const slot of sample.attention[0] ?? []) {
      const total = slot.reduce((a, b) => a + b, 0);
      expect(Math.abs(total - 1)).toBeLessThan(1e-5);
    }

    const picked = sample.palettes[1];
    expect(picked).toBeDefined();
    const bytes = Uint8Array.from(Buffer.from(TINY_PNG_B64, "base64"));
    const image = new Blob([bytes], { type: "image/png" });

    const result = await api.colorize(image, "tiny.png", picked!.lab, "harbor dusk");
    const body = new Uint8Array(await result.blob.arrayBuffer());
    // what the download link would save: a real PNG
    expect([...body.slice(0, 8)]).toEqual([137, 80, 78, 71, 13, 10, 26, 10]);
    expect(result.galleryId).toBeTruthy();

    const entries = await api.gallery();
    expect(entries.some((entry) => entry.id === result.galleryId)).toBe(true);
  }, 60_000);

  it("replays a seeded request identically", async () => {
    const first = await api.samplePalettes("harbor dusk", 2, 42);
    const second = await api.samplePalettes("harbor dusk", 2, 42);
    expect(second).toEqual(first);
  }, 30_000);
});
