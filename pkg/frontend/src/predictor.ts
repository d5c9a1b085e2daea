/** Debounced, superseding predictor.

Input changes are coalesced over a short window (default 150 ms). At most one
request is considered live at a time: issuing a new one supersedes anything
in flight, and a superseded response or error is dropped on arrival so the
screen can never show a prediction for inputs the user has already left.
*/
import type { PredictResponse } from "./types.js";

export interface PredictorCallbacks {
  onResult: (r: PredictResponse, inputs: Record<string, number>) => void;
  onError: (err: unknown) => void;
}

export class DebouncedPredictor {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private epoch = 0;

  constructor(
    private readonly predictFn: (
      inputs: Record<string, number>,
    ) => Promise<PredictResponse>,
    private readonly callbacks: PredictorCallbacks,
    public readonly delayMs = 150,
  ) {}

  /** Schedule a prediction for `inputs`, superseding any pending one. */
  request(inputs: Record<string, number>): void {
    if (this.timer !== null) clearTimeout(this.timer);
    const snapshot = { ...inputs };
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(snapshot);
    }, this.delayMs);
  }

  /** Issue immediately, bypassing the debounce window (initial load). */
  fireNow(inputs: Record<string, number>): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    void this.fire({ ...inputs });
  }

  private async fire(inputs: Record<string, number>): Promise<void> {
    const epoch = ++this.epoch;
    try {
      const result = await this.predictFn(inputs);
      if (epoch === this.epoch) this.callbacks.onResult(result, inputs);
    } catch (err) {
      if (epoch === this.epoch) this.callbacks.onError(err);
    }
  }
}
