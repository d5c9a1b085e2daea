/** Session state: the single source of truth for every number on screen.

Rendered values must trace back to a `/predict` or `/simulate` response (or a
control the user set) stored here; nothing else may invent data. Parameters
are kept within the fetched bounds by construction, and history entries are
deep-frozen on insertion so past results can never be edited.
*/
import type { ModelInfo, PredictResponse } from "./types.js";

export interface HistoryEntry {
  readonly id: number;
  /** Milliseconds since epoch at completion time. */
  readonly completedAt: number;
  readonly params: Readonly<Record<string, number>>;
  /** Surrogate means in effect when the simulation was requested. */
  readonly predicted: Readonly<Record<string, number>>;
  /** Authoritative simulator outputs. */
  readonly simulated: Readonly<Record<string, number>>;
  /** Absolute differences |simulated - predicted| per output. */
  readonly diffs: Readonly<Record<string, number>>;
}

function deepFreeze<T extends object>(obj: T): Readonly<T> {
  for (const v of Object.values(obj)) {
    if (v !== null && typeof v === "object") deepFreeze(v as object);
  }
  return Object.freeze(obj);
}

export class SessionState {
  private readonly values: Record<string, number> = {};
  private entries: readonly HistoryEntry[] = Object.freeze([]);
  private nextId = 1;

  /** Last successful prediction, kept on screen through network failures. */
  lastPrediction: PredictResponse | null = null;
  /** True when lastPrediction no longer reflects the current inputs. */
  stale = false;

  constructor(public readonly model: ModelInfo) {
    for (const p of model.design_space.parameters) {
      this.values[p.name] = (p.lower + p.upper) / 2;
    }
  }

  get params(): Record<string, number> {
    return { ...this.values };
  }

  getParam(name: string): number {
    const v = this.values[name];
    if (v === undefined) throw new RangeError(`unknown parameter: ${name}`);
    return v;
  }

  /**
   * Set one parameter. Values are validated, not clamped: the controls layer
   * owns clamping (with its user-visible notice), so a violation reaching
   * this far is a programming error.
   */
  setParam(name: string, value: number): void {
    const p = this.model.design_space.parameters.find((q) => q.name === name);
    if (!p) throw new RangeError(`unknown parameter: ${name}`);
    if (!Number.isFinite(value) || value < p.lower || value > p.upper) {
      throw new RangeError(
        `out of bounds: ${name}=${value} not in [${p.lower}, ${p.upper}]`,
      );
    }
    this.values[name] = value;
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  addHistoryEntry(
    params: Record<string, number>,
    predicted: Record<string, number>,
    simulated: Record<string, number>,
    completedAt: number,
  ): HistoryEntry {
    const diffs: Record<string, number> = {};
    for (const [name, sim] of Object.entries(simulated)) {
      const pred = predicted[name];
      if (pred !== undefined) diffs[name] = Math.abs(sim - pred);
    }
    const entry = deepFreeze({
      id: this.nextId++,
      completedAt,
      params: { ...params },
      predicted: { ...predicted },
      simulated: { ...simulated },
      diffs,
    });
    this.entries = Object.freeze([...this.entries, entry]);
    return entry;
  }
}
