/** Green/amber confidence badges from the served threshold policy.

The comparison mirrors the server's routing rule exactly: an output is amber
iff its ranking-space sigma strictly exceeds its threshold (equality stays
green), using the `ranking_std` field that `/predict` reports in the same
space the policy thresholds were fit in.
*/
import type {
  OutputPrediction,
  PredictResponse,
  ThresholdPolicyInfo,
} from "./types.js";

export type Badge = "green" | "amber";

export function badgeFor(
  name: string,
  pred: OutputPrediction,
  policy: ThresholdPolicyInfo | null,
): Badge {
  if (!policy) return "green";
  const i = policy.output_names.indexOf(name);
  if (i < 0) return "green";
  const threshold = policy.thresholds[i];
  if (threshold === undefined) return "green";
  return pred.ranking_std > threshold ? "amber" : "green";
}

/** True when any output of the prediction is amber: the design is uncertain
 * enough that the server-side router would escalate it to the simulator. */
export function anyAmber(
  prediction: PredictResponse,
  policy: ThresholdPolicyInfo | null,
): boolean {
  return Object.entries(prediction.outputs).some(
    ([name, pred]) => badgeFor(name, pred, policy) === "amber",
  );
}
