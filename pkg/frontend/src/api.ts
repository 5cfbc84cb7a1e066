/** Typed client for the palette/colorization HTTP API. */

export type LabRow = [number, number, number];

export interface PaletteCard {
  lab: LabRow[];
  hex: string[];
}

export interface SampleResponse {
  palettes: PaletteCard[];
  /** attention[palette][colorSlot][token], each slot row sums to 1 */
  attention: number[][][];
  tokens: string[];
  seed: number;
  all_tokens_unknown: boolean;
}

export interface HealthResponse {
  status: string;
  version: string;
  tpn_loaded: boolean;
  pcn_loaded: boolean;
}

export interface GalleryEntry {
  id: string;
  timestamp: string;
  text: string;
  palette: LabRow[];
  image_path: string;
  checkpoint_hash: string;
}

export interface ColorizeResult {
  blob: Blob;
  galleryId: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function failFrom(response: Response): Promise<never> {
  let message = `request failed (${response.status})`;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") message = body.detail;
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(response.status, message);
}

export class PaletteApi {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async health(): Promise<HealthResponse> {
    const response = await fetch(this.url("/api/health"));
    if (!response.ok) return failFrom(response);
    return (await response.json()) as HealthResponse;
  }

  async samplePalettes(text: string, count: number, seed?: number): Promise<SampleResponse> {
    const payload: Record<string, unknown> = { text, count };
    if (seed !== undefined) payload.seed = seed;
    const response = await fetch(this.url("/api/palettes"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) return failFrom(response);
    return (await response.json()) as SampleResponse;
  }

  async colorize(
    image: Blob,
    filename: string,
    palette: LabRow[],
    text?: string,
  ): Promise<ColorizeResult> {
    const form = new FormData();
    form.append("image", image, filename);
    form.append("palette", JSON.stringify({ colors: palette }));
    if (text) form.append("text", text);
    const response = await fetch(this.url("/api/colorize"), { method: "POST", body: form });
    if (!response.ok) return failFrom(response);
    return {
      blob: await response.blob(),
      galleryId: response.headers.get("X-Gallery-Id"),
    };
  }

  async gallery(): Promise<GalleryEntry[]> {
    const response = await fetch(this.url("/api/gallery"));
    if (!response.ok) return failFrom(response);
    const body = (await response.json()) as { entries: GalleryEntry[] };
    return body.entries;
  }
}
