/** Prediction panel: per-output surrogate mean, uncertainty band, confidence
 * badge, and — after an on-demand run — the authoritative simulated value
 * overlaid beside the surrogate's.
 *
 * The band is mean ± k·std in original units (k configurable, default 2).
 * Zero std renders as a point band. On network failure the panel greys out
 * and keeps the last good prediction behind an explicit staleness marker;
 * it never clears numbers it cannot replace.
 */
import { badgeFor, anyAmber } from "./badges.js";
import { fmt } from "./format.js";
import type {
  ModelInfo,
  OutputInfo,
  PredictResponse,
} from "./types.js";

export class PredictionPanel {
  private readonly rows = new Map<
    string,
    {
      mean: HTMLElement;
      band: HTMLElement;
      badge: HTMLElement;
      simulated: HTMLElement;
    }
  >();
  private readonly staleMarker: HTMLElement;
  private readonly progress: HTMLElement;
  readonly ctaButton: HTMLButtonElement;
  private readonly container: HTMLElement;

  constructor(
    root: HTMLElement,
    private readonly model: ModelInfo,
    public readonly bandMultiplier = 2,
  ) {
    this.container = document.createElement("section");
    this.container.className = "panel prediction-panel";

    this.staleMarker = document.createElement("div");
    this.staleMarker.className = "stale-marker";
    this.staleMarker.hidden = true;
    this.container.appendChild(this.staleMarker);

    const table = document.createElement("table");
    table.className = "outputs";
    const head = document.createElement("tr");
    for (const h of [
      "output",
      "surrogate mean",
      `±${bandMultiplier}σ band`,
      "confidence",
      "simulated",
    ]) {
      const th = document.createElement("th");
      th.textContent = h;
      head.appendChild(th);
    }
    table.appendChild(head);

    for (const out of model.outputs) {
      table.appendChild(this.buildRow(out));
    }
    this.container.appendChild(table);

    this.ctaButton = document.createElement("button");
    this.ctaButton.className = "cta run-simulation";
    this.ctaButton.textContent = "Run simulation";
    this.ctaButton.hidden = true;
    this.container.appendChild(this.ctaButton);

    this.progress = document.createElement("div");
    this.progress.className = "sim-progress";
    this.progress.hidden = true;
    this.container.appendChild(this.progress);

    root.appendChild(this.container);
  }

  private buildRow(out: OutputInfo): HTMLTableRowElement {
    const tr = document.createElement("tr");
    tr.dataset.output = out.name;
    const name = document.createElement("td");
    name.className = "output-name";
    name.textContent = `${out.name} (${out.unit})`;
    const mean = document.createElement("td");
    mean.className = "mean";
    const band = document.createElement("td");
    band.className = "band";
    const badge = document.createElement("td");
    badge.className = "badge";
    const simulated = document.createElement("td");
    simulated.className = "simulated";
    tr.append(name, mean, band, badge, simulated);
    this.rows.set(out.name, { mean, band, badge, simulated });
    return tr;
  }

  /** Render a fresh prediction; clears any previous simulated overlay, which
   * belonged to the inputs that produced the previous prediction. */
  showPrediction(pred: PredictResponse): void {
    const policy = this.model.threshold_policy;
    for (const [name, row] of this.rows) {
      const rec = pred.outputs[name];
      if (!rec) continue;
      row.mean.textContent = fmt(rec.mean);
      const k = this.bandMultiplier;
      const lo = rec.mean - k * rec.std;
      const hi = rec.mean + k * rec.std;
      row.band.textContent = `[${fmt(lo)}, ${fmt(hi)}]`;
      row.band.classList.toggle("point-band", rec.std === 0);
      const b = badgeFor(name, rec, policy);
      row.badge.textContent = b;
      row.badge.classList.toggle("amber", b === "amber");
      row.badge.classList.toggle("green", b === "green");
      row.simulated.textContent = "";
      row.simulated.classList.remove("authoritative");
    }
    this.ctaButton.hidden = !anyAmber(pred, policy);
    this.container.classList.remove("stale");
    this.staleMarker.hidden = true;
    this.staleMarker.textContent = "";
  }

  /** Grey out and flag the panel; the last good values stay visible. */
  markStale(): void {
    this.container.classList.add("stale");
    this.staleMarker.textContent =
      "prediction service unreachable — showing last good prediction";
    this.staleMarker.hidden = false;
  }

  /** Overlay authoritative simulator outputs beside the surrogate values. */
  overlaySimulated(outputs: Record<string, number>): void {
    for (const [name, row] of this.rows) {
      const v = outputs[name];
      if (v === undefined) continue;
      row.simulated.textContent = fmt(v);
      row.simulated.classList.add("authoritative");
    }
  }

  setProgress(text: string | null): void {
    if (text === null) {
      this.progress.hidden = true;
      this.progress.textContent = "";
    } else {
      this.progress.textContent = text;
      this.progress.hidden = false;
    }
  }

  get element(): HTMLElement {
    return this.container;
  }
}
