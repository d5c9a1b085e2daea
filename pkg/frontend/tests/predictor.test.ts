import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { DebouncedPredictor } from "../src/predictor.js";
import type { PredictResponse } from "../src/types.js";
import { flush, prediction } from "./helpers.js";

describe("DebouncedPredictor", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  function collect() {
    const results: PredictResponse[] = [];
    const errors: unknown[] = [];
    return {
      results,
      errors,
      callbacks: {
        onResult: (r: PredictResponse) => results.push(r),
        onError: (e: unknown) => errors.push(e),
      },
    };
  }

  it("waits out the debounce window before issuing a request", async () => {
    const fn = vi.fn(async () => prediction());
    const { results, callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);

    p.request({ u_wall: 0.5 });
    vi.advanceTimersByTime(149);
    expect(fn).not.toHaveBeenCalled();
    vi.advanceTimersByTime(1);
    expect(fn).toHaveBeenCalledTimes(1);
    await flush();
    expect(results).toHaveLength(1);
  });

  it("coalesces rapid input changes into one request for the last value", async () => {
    const fn = vi.fn(async (inputs: Record<string, number>) =>
      prediction({ heating_demand: { mean: inputs["u_wall"]! } }),
    );
    const { results, callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);

    for (const v of [0.2, 0.3, 0.4, 0.5]) {
      p.request({ u_wall: v });
      vi.advanceTimersByTime(50); // each change inside the previous window
    }
    vi.advanceTimersByTime(150);
    await flush();
    expect(fn).toHaveBeenCalledTimes(1);
    expect(fn).toHaveBeenCalledWith({ u_wall: 0.5 });
    expect(results).toHaveLength(1);
  });

  it("drops a superseded in-flight response, even when it wins the race", async () => {
    const gates: (() => void)[] = [];
    const fn = vi.fn((inputs: Record<string, number>) => {
      return new Promise<PredictResponse>((resolve) => {
        gates.push(() =>
          resolve(prediction({ heating_demand: { mean: inputs["u_wall"]! } })),
        );
      });
    });
    const { results, callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);

    p.request({ u_wall: 0.1 });
    vi.advanceTimersByTime(150); // first request in flight
    p.request({ u_wall: 0.9 });
    vi.advanceTimersByTime(150); // second supersedes it
    expect(fn).toHaveBeenCalledTimes(2);

    gates[0]!(); // stale response arrives first…
    await flush();
    expect(results).toHaveLength(0); // …and is discarded
    gates[1]!();
    await flush();
    expect(results).toHaveLength(1);
    expect(results[0]!.outputs["heating_demand"]!.mean).toBe(0.9);
  });

  it("ignores errors from superseded requests", async () => {
    const gates: { resolve?: () => void; reject?: () => void }[] = [];
    const fn = vi.fn(() => {
      const gate: { resolve?: () => void; reject?: () => void } = {};
      gates.push(gate);
      return new Promise<PredictResponse>((resolve, reject) => {
        gate.resolve = () => resolve(prediction());
        gate.reject = () => reject(new Error("boom"));
      });
    });
    const { results, errors, callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);

    p.request({ a: 1 });
    vi.advanceTimersByTime(150);
    p.request({ a: 2 });
    vi.advanceTimersByTime(150);

    gates[0]!.reject!(); // stale failure: silent
    await flush();
    expect(errors).toHaveLength(0);
    gates[1]!.resolve!();
    await flush();
    expect(results).toHaveLength(1);
  });

  it("reports an error from the live request", async () => {
    const fn = vi.fn(async () => {
      throw new Error("offline");
    });
    const { errors, callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);
    p.request({ a: 1 });
    vi.advanceTimersByTime(150);
    await flush();
    expect(errors).toHaveLength(1);
    expect((errors[0] as Error).message).toBe("offline");
  });

  it("fireNow bypasses the debounce and cancels a pending request", async () => {
    const fn = vi.fn(async (inputs: Record<string, number>) =>
      prediction({ heating_demand: { mean: inputs["v"]! } }),
    );
    const { results, callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);
    p.request({ v: 1 });
    p.fireNow({ v: 2 });
    await flush();
    vi.advanceTimersByTime(400);
    await flush();
    expect(fn).toHaveBeenCalledTimes(1);
    expect(fn).toHaveBeenCalledWith({ v: 2 });
    expect(results).toHaveLength(1);
  });

  it("snapshots inputs at request time", async () => {
    const fn = vi.fn(async (inputs: Record<string, number>) =>
      prediction({ heating_demand: { mean: inputs["v"]! } }),
    );
    const { callbacks } = collect();
    const p = new DebouncedPredictor(fn, callbacks, 150);
    const live = { v: 1 };
    p.request(live);
    live.v = 42; // caller mutates after scheduling
    vi.advanceTimersByTime(150);
    await flush();
    expect(fn).toHaveBeenCalledWith({ v: 1 });
  });
});
