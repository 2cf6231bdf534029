/** Client-side recomputation of the server's consensus math.
 *
 * The UI has no authority: these values are rendered as live previews and
 * cross-checked against the server's score/disagreement in tests. Any
 * displayed discrepancy is a bug.
 */
import type { Ballot, GateConfig, Strategy } from "./types.js";

/** Mean preference over the cast ballots. */
export function gpref(ballots: Ballot[]): number {
  if (ballots.length === 0) {
    throw new Error("gpref needs at least one ballot");
  }
  return ballots.reduce((acc, b) => acc + b.pref, 0) / ballots.length;
}

/** Normalized mean absolute pairwise difference; 0 means unanimity. */
export function dis(ballots: Ballot[]): number {
  const n = ballots.length;
  if (n < 2) {
    throw new Error("dis needs at least two ballots");
  }
  let total = 0;
  for (let i = 0; i < n; i += 1) {
    for (let j = i + 1; j < n; j += 1) {
      total += Math.abs(ballots[i].pref - ballots[j].pref);
    }
  }
  return (2 / (n * (n - 1))) * total;
}

export function aggregate(
  strategy: Strategy,
  ballots: Ballot[],
  levels: Map<string, number> = new Map(),
): number {
  if (ballots.length === 0) {
    throw new Error("no ballots to aggregate");
  }
  switch (strategy) {
    case "AVERAGE":
      return gpref(ballots);
    case "PLURALITY":
      return ballots.filter((b) => b.pref >= 0.5).length / ballots.length;
    case "LEAST_MISERY":
      return Math.min(...ballots.map((b) => b.pref));
    case "QUADRATIC": {
      const weights = ballots.map((b) => Math.sqrt(b.credits ?? 1));
      const total = weights.reduce((a, w) => a + w, 0);
      return ballots.reduce((a, b, i) => a + weights[i] * b.pref, 0) / total;
    }
    case "EXPERT_WEIGHTED": {
      const weights = ballots.map((b) => 1 / (1 + (levels.get(b.voter) ?? 0)));
      const total = weights.reduce((a, w) => a + w, 0);
      return ballots.reduce((a, b, i) => a + weights[i] * b.pref, 0) / total;
    }
  }
}

export interface Evaluation {
  score: number | null;
  disagreement: number | null;
  verdict: "ACCEPT" | "REJECT" | null;
  quorumMet: boolean;
}

/** Recompute score, disagreement and verdict the way the server does. */
export function evaluate(
  config: GateConfig,
  ballots: Ballot[],
  group: string[],
  levels: Map<string, number> = new Map(),
): Evaluation {
  const quorumMet = ballots.length >= config.quorum * group.length - 1e-9;
  if (ballots.length === 0) {
    return { score: null, disagreement: null, verdict: null, quorumMet };
  }
  const score = aggregate(config.strategy, ballots, levels);
  const disagreement = ballots.length >= 2 ? dis(ballots) : null;
  let verdict: "ACCEPT" | "REJECT" | null = null;
  if (quorumMet) {
    const prefOk = score >= config.prefThreshold;
    const disOk =
      config.disThreshold === null ||
      disagreement === null ||
      disagreement <= config.disThreshold;
    verdict = prefOk && disOk ? "ACCEPT" : "REJECT";
  }
  return { score, disagreement, verdict, quorumMet };
}
