/** Shared test fixtures: a canned model description and a scriptable fetch
 * stub that speaks the service's wire protocol. */
import type {
  ModelInfo,
  OutputPrediction,
  PredictResponse,
  SimulateResponse,
} from "../src/types.js";

export const OUTPUTS = [
  "heating_demand",
  "cooling_demand",
  "heating_gas",
  "pv_generation",
] as const;

export function testModel(overrides: Partial<ModelInfo> = {}): ModelInfo {
  return {
    model_id: "bnn-test",
    architecture: { family: "bnn", hidden_layers: [16], mc_samples: 10 },
    design_space: {
      parameters: [
        { name: "u_wall", lower: 0.1, upper: 1.0, unit: "W/m2K" },
        { name: "wwr", lower: 0.1, upper: 0.9, unit: "-" },
      ],
    },
    outputs: OUTPUTS.map((name) => ({
      name,
      unit: "MWh/yr",
      direction: name === "pv_generation" ? "max" : "min",
    })),
    threshold_policy: {
      thresholds: [0.5, 0.5, 0.5, 0.5],
      percentile: 90,
      aggregation: "any-output-exceeds",
      monitor_output: null,
      output_names: [...OUTPUTS],
    },
    simulate_latency_s: 0.5,
    has_pipeline: true,
    ...overrides,
  };
}

export function prediction(
  perOutput: Partial<Record<(typeof OUTPUTS)[number], Partial<OutputPrediction>>> = {},
): PredictResponse {
  const outputs: Record<string, OutputPrediction> = {};
  for (const name of OUTPUTS) {
    outputs[name] = {
      mean: 100,
      std: 5,
      ranking_std: 0.2,
      unit: "MWh/yr",
      ...perOutput[name],
    };
  }
  return { outputs, mc_samples: 10, model_id: "bnn-test" };
}

export interface MockApi {
  fetchFn: typeof fetch;
  calls: { method: string; path: string; body?: unknown }[];
  /** Replace the handler for a route ("POST /predict", "GET /model", …). */
  on(route: string, handler: RouteHandler): void;
  /** Calls recorded for one route. */
  callsTo(route: string): { body?: unknown }[];
}

export type RouteHandler = (body: unknown) =>
  | { status?: number; json: unknown }
  | Promise<{ status?: number; json: unknown }>;

/** Build a fetch stub with sensible defaults for every service route. */
export function mockApi(model: ModelInfo = testModel()): MockApi {
  const handlers = new Map<string, RouteHandler>();
  handlers.set("GET /model", () => ({ json: model }));
  handlers.set("POST /predict", () => ({ json: prediction() }));
  handlers.set("POST /simulate", () => ({
    json: {
      status: "done",
      outputs: Object.fromEntries(OUTPUTS.map((n) => [n, 99])),
      units: Object.fromEntries(OUTPUTS.map((n) => [n, "MWh/yr"])),
    } satisfies SimulateResponse,
  }));

  const calls: { method: string; path: string; body?: unknown }[] = [];

  // A plain object standing in for Response: a real one consumes its body
  // through stream machinery that starves under fake timers.
  const jsonResponse = (json: unknown, status = 200): Response =>
    ({
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => json,
    }) as unknown as Response;

  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === "string" ? input : input.toString();
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, path, body });

    const exact = handlers.get(`${method} ${path}`);
    const jobMatch = path.match(/^\/simulate\/(.+)$/);
    const handler =
      exact ??
      (method === "GET" && jobMatch ? handlers.get("GET /simulate/*") : undefined);
    if (!handler) {
      return jsonResponse({ detail: `no handler: ${method} ${path}` }, 404);
    }
    const result = await handler(body);
    return jsonResponse(result.json, result.status ?? 200);
  }) as typeof fetch;

  return {
    fetchFn,
    calls,
    on(route, handler) {
      handlers.set(route, handler);
    },
    callsTo(route) {
      const [method, path] = route.split(" ");
      return calls.filter((c) => c.method === method && c.path === path);
    },
  };
}

/** Drain pending microtasks so awaited fetches settle under fake timers. */
export async function flush(times = 10): Promise<void> {
  for (let i = 0; i < times; i++) await Promise.resolve();
}
