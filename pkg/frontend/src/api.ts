/** Thin fetch client plus client-side input validation.

The validation mirrors the server's 400 rules exactly (missing, non-numeric,
out-of-bounds, unknown input — in that order, naming the offending field) so
requests that would be rejected never leave the browser.
*/
import type {
  ModelInfo,
  ParameterInfo,
  PredictResponse,
  SimulateResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/**
 * First violation the server would reject with a 400, or null when the
 * inputs are acceptable.
 */
export function validateInputs(
  inputs: Record<string, number>,
  params: ParameterInfo[],
): string | null {
  for (const p of params) {
    if (!(p.name in inputs)) return `missing input: ${p.name}`;
    const v = inputs[p.name]!;
    if (typeof v !== "number" || Number.isNaN(v)) {
      return `non-numeric input: ${p.name}`;
    }
    if (!Number.isFinite(v) || v < p.lower || v > p.upper) {
      return `out of bounds: ${p.name}=${v} not in [${p.lower}, ${p.upper}]`;
    }
  }
  const known = new Set(params.map((p) => p.name));
  const extra = Object.keys(inputs)
    .filter((k) => !known.has(k))
    .sort();
  if (extra.length > 0) return `unknown input: ${extra[0]}`;
  return null;
}

async function parseJson(resp: Response): Promise<unknown> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json();
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async post(path: string, body: unknown): Promise<unknown> {
    const resp = await this.fetchFn(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseJson(resp);
  }

  async getModel(): Promise<ModelInfo> {
    const resp = await this.fetchFn(this.url("/model"));
    return (await parseJson(resp)) as ModelInfo;
  }

  async predict(inputs: Record<string, number>): Promise<PredictResponse> {
    return (await this.post("/predict", { inputs })) as PredictResponse;
  }

  async simulate(inputs: Record<string, number>): Promise<SimulateResponse> {
    return (await this.post("/simulate", { inputs })) as SimulateResponse;
  }

  async jobStatus(jobId: string): Promise<SimulateResponse> {
    const resp = await this.fetchFn(this.url(`/simulate/${jobId}`));
    return (await parseJson(resp)) as SimulateResponse;
  }
}
