/** Wire types mirroring the service's canonical JSON payloads. */

export type Strategy =
  | "AVERAGE"
  | "PLURALITY"
  | "LEAST_MISERY"
  | "QUADRATIC"
  | "EXPERT_WEIGHTED";

export interface GateConfig {
  strategy: Strategy;
  prefThreshold: number;
  disThreshold: number | null;
  quorum: number;
}

export interface Ballot {
  voter: string;
  pref: number;
  credits: number | null;
  timestamp: string;
}

export interface Round {
  id: string;
  subject: { kind: string; target: string };
  group: string[];
  config: GateConfig;
  ballots: Ballot[];
  state: "OPEN" | "CLOSED";
  verdict: "ACCEPT" | "REJECT" | null;
  score: number | null;
  disagreement: number | null;
  phase: string;
  openedAt: string;
  closedAt: string | null;
}

export interface PhaseStats {
  phase: string;
  cycleCount: number;
  commitCount: number;
  branchCount: number;
  artefactCount: number;
  narrativeCount: number;
  roundCount: number;
  rejectCount: number;
}

export interface Stats {
  phases: PhaseStats[];
}

export interface Researcher {
  id: string;
  displayName: string;
  hierarchyLevel: number;
}

export interface Project {
  project: string;
  phases: string[][];
  roster: Researcher[];
  defaults: GateConfig;
  state: { currentPhase: number; currentCycle: number };
  head: { phase: string; branch: string };
}

export interface Release {
  tag: string;
  commit: string;
  phase: string;
  round: string;
  timestamp: string;
}
