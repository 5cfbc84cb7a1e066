/** Display-only CIE Lab -> sRGB hex, for gallery entries that carry raw Lab. */

import type { LabRow } from "./api.js";

const WHITE: [number, number, number] = [0.95047, 1.0, 1.08883];
const DELTA = 6 / 29;

function finv(t: number): number {
  return t > DELTA ? t * t * t : 3 * DELTA * DELTA * (t - 4 / 29);
}

function gamma(u: number): number {
  return u <= 0.0031308 ? 12.92 * u : 1.055 * Math.pow(u, 1 / 2.4) - 0.055;
}

export function labToHex([L, a, b]: LabRow): string {
  const fy = (L + 16) / 116;
  const [xn, yn, zn] = WHITE;
  const x = xn * finv(fy + a / 500);
  const y = yn * finv(fy);
  const z = zn * finv(fy - b / 200);
  const linear = [
    3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
    -0.969266 * x + 1.8760108 * y + 0.041556 * z,
    0.0556434 * x - 0.2040259 * y + 1.0572252 * z,
  ];
  const channels = linear.map((u) => {
    const clipped = Math.min(1, Math.max(0, u));
    return Math.round(gamma(clipped) * 255);
  });
  return "#" + channels.map((c) => c.toString(16).padStart(2, "0")).join("");
}
