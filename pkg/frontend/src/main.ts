/** Application bootstrap.
 *
 * Fetches the model description, then builds the three panels (controls,
 * live prediction, history) around a shared SessionState. A failed model
 * fetch renders a blocking error banner with a retry button — without the
 * design space there is nothing meaningful to show.
 */
import { ApiClient, ApiError, validateInputs } from "./api.js";
import { Controls } from "./controls.js";
import { fmtSeconds } from "./format.js";
import { HistoryView } from "./history.js";
import { PredictionPanel } from "./panel.js";
import { DebouncedPredictor } from "./predictor.js";
import { SessionState } from "./state.js";
import { SimulationRunner } from "./simulation.js";
import { showToast } from "./toast.js";
import type { ModelInfo } from "./types.js";

export interface AppOptions {
  baseUrl?: string;
  bandMultiplier?: number;
  debounceMs?: number;
  pollIntervalMs?: number;
  fetchFn?: typeof fetch;
}

export interface App {
  state: SessionState;
  model: ModelInfo;
  panel: PredictionPanel;
  controls: Controls;
  history: HistoryView;
  predictor: DebouncedPredictor;
}

/** Read runtime options from the page URL (?api=…&band=…). */
export function optionsFromLocation(loc: { search: string }): AppOptions {
  const q = new URLSearchParams(loc.search);
  const opts: AppOptions = {};
  const api = q.get("api");
  if (api) opts.baseUrl = api;
  const band = Number(q.get("band"));
  if (Number.isFinite(band) && band > 0) opts.bandMultiplier = band;
  return opts;
}

export async function boot(
  root: HTMLElement,
  opts: AppOptions = {},
): Promise<App | null> {
  const api = new ApiClient(
    opts.baseUrl ?? "http://localhost:8000",
    opts.fetchFn,
  );
  root.textContent = "";

  let model: ModelInfo;
  try {
    model = await api.getModel();
  } catch (err) {
    renderErrorBanner(root, err, () => void boot(root, opts));
    return null;
  }

  const state = new SessionState(model);
  const params = model.design_space.parameters;

  const header = document.createElement("header");
  const title = document.createElement("h1");
  title.textContent = "Surrogate explorer";
  const sub = document.createElement("p");
  sub.className = "model-line";
  const family = String(model.architecture["family"] ?? "model");
  sub.textContent =
    `${family} · ${model.model_id ?? "unnamed"} · ` +
    `simulator ≈ ${fmtSeconds(model.simulate_latency_s)} per run`;
  header.append(title, sub);

  const controlsEl = document.createElement("section");
  controlsEl.className = "panel controls-panel";

  root.appendChild(header);
  root.appendChild(controlsEl);

  const panel = new PredictionPanel(root, model, opts.bandMultiplier ?? 2);
  const history = new HistoryView(root, model.outputs);

  const predictor = new DebouncedPredictor(
    (inputs) => {
      // mirror the server's 400 rules before anything leaves the browser
      const violation = validateInputs(inputs, params);
      if (violation) return Promise.reject(new ApiError(400, violation));
      return api.predict(inputs);
    },
    {
      onResult: (r) => {
        state.lastPrediction = r;
        state.stale = false;
        panel.showPrediction(r);
      },
      onError: () => {
        state.stale = true;
        panel.markStale();
      },
    },
    opts.debounceMs ?? 150,
  );

  const controls = new Controls(controlsEl, params, state.params, (name, v) => {
    state.setParam(name, v);
    predictor.request(state.params);
  });

  const runner = new SimulationRunner(api, opts.pollIntervalMs ?? 300);
  const expected = `expected ≈ ${fmtSeconds(model.simulate_latency_s)}`;

  const runSimulation = (snapshot: {
    params: Record<string, number>;
    predicted: Record<string, number>;
  }): void => {
    panel.setProgress(`simulating… ${expected}`);
    void runner.run(snapshot.params, {
      onPending: (jobId) =>
        panel.setProgress(`simulating (job ${jobId})… ${expected}`),
      onDone: (result) => {
        panel.setProgress(null);
        panel.overlaySimulated(result.outputs);
        const entry = state.addHistoryEntry(
          snapshot.params,
          snapshot.predicted,
          result.outputs,
          Date.now(),
        );
        history.addEntry(entry);
      },
      onFailed: (message) => {
        panel.setProgress(null);
        showToast(root, `Simulation failed: ${message}`, () =>
          runSimulation(snapshot),
        );
      },
    });
  };

  panel.ctaButton.addEventListener("click", () => {
    const pred = state.lastPrediction;
    if (!pred) return;
    const predicted: Record<string, number> = {};
    for (const [name, rec] of Object.entries(pred.outputs)) {
      predicted[name] = rec.mean;
    }
    runSimulation({ params: state.params, predicted });
  });

  predictor.fireNow(state.params);

  return { state, model, panel, controls, history, predictor };
}

function renderErrorBanner(
  root: HTMLElement,
  err: unknown,
  onRetry: () => void,
): void {
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.setAttribute("role", "alert");
  const msg = document.createElement("p");
  const detail = err instanceof Error ? err.message : String(err);
  msg.textContent = `Could not load the model description: ${detail}`;
  const retry = document.createElement("button");
  retry.className = "banner-retry";
  retry.textContent = "Retry";
  retry.addEventListener("click", onRetry);
  banner.append(msg, retry);
  root.appendChild(banner);
}
