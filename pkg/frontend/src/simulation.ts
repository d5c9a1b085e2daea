/** On-demand simulation runner.
 *
 * POST /simulate either answers inline (`done`) or returns a job id that is
 * polled on a timer until it resolves. Callers get lifecycle callbacks; a
 * failure (job or network) surfaces through onFailed and never erases
 * anything already on screen.
 */
import type { ApiClient } from "./api.js";
import type { SimulateDone } from "./types.js";

export interface SimulationCallbacks {
  /** Fired when the run is accepted but not yet finished. */
  onPending: (jobId: string) => void;
  onDone: (result: SimulateDone) => void;
  onFailed: (message: string) => void;
}

export class SimulationRunner {
  constructor(
    private readonly api: ApiClient,
    public readonly pollIntervalMs = 300,
    public readonly timeoutMs = 120_000,
  ) {}

  /** Start a run for `inputs`; resolves when a terminal callback has fired. */
  async run(
    inputs: Record<string, number>,
    callbacks: SimulationCallbacks,
  ): Promise<void> {
    let first;
    try {
      first = await this.api.simulate(inputs);
    } catch (err) {
      callbacks.onFailed(message(err));
      return;
    }
    if (first.status === "done") {
      callbacks.onDone(first);
      return;
    }
    if (first.status === "failed") {
      callbacks.onFailed(first.error);
      return;
    }
    callbacks.onPending(first.job_id);
    await this.poll(first.job_id, callbacks);
  }

  private poll(jobId: string, callbacks: SimulationCallbacks): Promise<void> {
    const deadline = Date.now() + this.timeoutMs;
    return new Promise((resolve) => {
      const tick = async () => {
        let status;
        try {
          status = await this.api.jobStatus(jobId);
        } catch (err) {
          callbacks.onFailed(message(err));
          resolve();
          return;
        }
        if (status.status === "done") {
          callbacks.onDone(status);
          resolve();
        } else if (status.status === "failed") {
          callbacks.onFailed(status.error);
          resolve();
        } else if (Date.now() > deadline) {
          callbacks.onFailed(`simulation ${jobId} timed out`);
          resolve();
        } else {
          setTimeout(() => void tick(), this.pollIntervalMs);
        }
      };
      setTimeout(() => void tick(), this.pollIntervalMs);
    });
  }
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
