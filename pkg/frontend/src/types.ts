/** Wire types for the surrogate service API. */

export interface ParameterInfo {
  name: string;
  lower: number;
  upper: number;
  unit: string;
}

export interface OutputInfo {
  name: string;
  unit: string;
  /** Which direction is better for this output when comparing designs. */
  direction: "min" | "max";
}

export interface ThresholdPolicyInfo {
  /** Per-output routing thresholds, aligned with output_names. */
  thresholds: number[];
  percentile: number;
  aggregation: string;
  monitor_output: number | null;
  output_names: string[];
}

export interface ModelInfo {
  model_id: string | null;
  architecture: Record<string, unknown>;
  design_space: { parameters: ParameterInfo[] };
  outputs: OutputInfo[];
  threshold_policy: ThresholdPolicyInfo | null;
  /** Configured wall-clock latency of one simulator run, seconds. */
  simulate_latency_s: number;
  has_pipeline: boolean;
}

export interface OutputPrediction {
  /** Point estimate in original units. */
  mean: number;
  /** Predictive standard deviation in original units (drives the band). */
  std: number;
  /**
   * Standard deviation in the same space as the threshold policy; the badge
   * comparison `ranking_std > threshold` reproduces the server's routing rule.
   */
  ranking_std: number;
  unit: string;
}

export interface PredictResponse {
  outputs: Record<string, OutputPrediction>;
  mc_samples: number;
  model_id: string | null;
}

export interface SimulateDone {
  status: "done";
  outputs: Record<string, number>;
  units: Record<string, string>;
}

export interface SimulatePending {
  status: "pending";
  job_id: string;
}

export interface SimulateFailed {
  status: "failed";
  error: string;
  job_id?: string;
}

export type SimulateResponse = SimulateDone | SimulatePending | SimulateFailed;
