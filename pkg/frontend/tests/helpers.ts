import type { SampleResponse } from "../src/api.js";

/** A deterministic two-token, N-palette sample payload shaped like the API's. */
export function fakeSample(count: number): SampleResponse {
  const tokens = ["autumn", "embers"];
  const palettes = Array.from({ length: count }, (_, p) => ({
    lab: Array.from({ length: 5 }, (_, s) => [40 + 10 * s, p * 5 - 10, 20 - p * 5] as [number, number, number]),
    hex: ["#663322", "#885533", "#aa7744", "#cc9955", "#eebb66"],
  }));
  const attention = Array.from({ length: count }, (_, p) =>
    Array.from({ length: 5 }, (_, s) => {
      const w = 0.2 + 0.1 * ((p + s) % 3);
      return [w, 1 - w];
    }),
  );
  return { palettes, attention, tokens, seed: 7, all_tokens_unknown: false };
}

export function jsonResponse(body: unknown, status = 200, headers: Record<string, string> = {}): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json", ...headers },
  });
}
