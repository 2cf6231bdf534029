/** Pure view-model builders and HTML renderers (no DOM access here,
 * so everything is testable against canned server payloads). */
import { evaluate } from "./consensus.js";
import type { PhaseStats, Project, Round, Stats } from "./types.js";

export interface VoterStatus {
  voter: string;
  status: "cast" | "pending";
  pref: number | null;
}

export interface RoundView {
  id: string;
  subject: string;
  strategy: string;
  state: "OPEN" | "CLOSED";
  /** Live values recomputed from ballots; must match the server's. */
  score: number | null;
  disagreement: number | null;
  verdict: "ACCEPT" | "REJECT" | null;
  prefThreshold: number;
  disThreshold: number | null;
  voters: VoterStatus[];
  quorumMet: boolean;
  /** Gated actions are enabled only on an accepted verdict. */
  actionsEnabled: boolean;
  /** Mismatch between client recomputation and server values is a bug. */
  serverMismatch: boolean;
}

export function formatScore(value: number | null): string {
  return value === null ? "—" : value.toFixed(2);
}

function levelsOf(project: Project | null): Map<string, number> {
  const levels = new Map<string, number>();
  for (const member of project?.roster ?? []) {
    levels.set(member.id, member.hierarchyLevel);
  }
  return levels;
}

export function buildRoundView(round: Round, project: Project | null = null): RoundView {
  const live = evaluate(round.config, round.ballots, round.group, levelsOf(project));
  const cast = new Map(round.ballots.map((b) => [b.voter, b.pref]));
  const voters: VoterStatus[] = round.group.map((voter) => ({
    voter,
    status: cast.has(voter) ? "cast" : "pending",
    pref: cast.get(voter) ?? null,
  }));
  // When the round is closed the server's stored values are authoritative;
  // the client recomputation must agree with them to two decimals.
  const score = round.state === "CLOSED" ? round.score : live.score;
  const disagreement = round.state === "CLOSED" ? round.disagreement : live.disagreement;
  const verdict = round.state === "CLOSED" ? round.verdict : live.verdict;
  const serverMismatch =
    round.state === "CLOSED" &&
    (formatScore(live.score) !== formatScore(round.score) ||
      formatScore(live.disagreement) !== formatScore(round.disagreement));
  return {
    id: round.id,
    subject: `${round.subject.kind} @ ${round.subject.target.slice(0, 12)}`,
    strategy: round.config.strategy,
    state: round.state,
    score,
    disagreement,
    verdict,
    prefThreshold: round.config.prefThreshold,
    disThreshold: round.config.disThreshold,
    voters,
    quorumMet: live.quorumMet,
    actionsEnabled: verdict === "ACCEPT",
    serverMismatch,
  };
}

export interface PhaseBadge {
  phase: string;
  cycles: number;
  current: boolean;
}

export function buildTimeline(stats: Stats, project: Project | null = null): PhaseBadge[] {
  const current = project?.head.phase;
  return stats.phases.map((p: PhaseStats) => ({
    phase: p.phase,
    cycles: p.cycleCount,
    current: p.phase === current,
  }));
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTimeline(badges: PhaseBadge[]): string {
  const items = badges
    .map(
      (b) => `<li class="phase${b.current ? " current" : ""}">
        <span class="phase-name">${escapeHtml(b.phase)}</span>
        <span class="cycle-badge" data-phase="${escapeHtml(b.phase)}">${b.cycles}</span>
      </li>`,
    )
    .join("\n");
  return `<ol class="timeline">${items}</ol>`;
}

function gauge(label: string, value: number | null, threshold: number | null, invert: boolean): string {
  const pct = value === null ? 0 : Math.round(value * 100);
  const ok =
    value !== null &&
    threshold !== null &&
    (invert ? value <= threshold : value >= threshold);
  const marker =
    threshold === null
      ? ""
      : `<span class="gauge-threshold" style="left:${Math.round(threshold * 100)}%"></span>`;
  return `<div class="gauge ${ok ? "ok" : "at-risk"}" data-gauge="${label}">
      <span class="gauge-label">${label}</span>
      <span class="gauge-bar"><span class="gauge-fill" style="width:${pct}%"></span>${marker}</span>
      <span class="gauge-value">${formatScore(value)}</span>
    </div>`;
}

export function renderRound(view: RoundView): string {
  const voters = view.voters
    .map(
      (v) => `<li class="voter ${v.status}">${escapeHtml(v.voter)}:
        ${v.status === "cast" ? formatScore(v.pref) : "pending"}</li>`,
    )
    .join("\n");
  const verdict = view.verdict
    ? `<span class="verdict ${view.verdict.toLowerCase()}">${view.verdict}</span>`
    : `<span class="verdict open">awaiting quorum</span>`;
  const mismatch = view.serverMismatch
    ? `<p class="error">client/server score mismatch — please report</p>`
    : "";
  const disabled = view.actionsEnabled ? "" : ' disabled title="gate not passed"';
  return `<section class="round" data-round="${escapeHtml(view.id)}">
    <h3>${escapeHtml(view.subject)} <em>${view.strategy}</em> ${verdict}</h3>
    ${gauge("score", view.score, view.prefThreshold, false)}
    ${gauge("disagreement", view.disagreement, view.disThreshold, true)}
    <ul class="voters">${voters}</ul>
    ${mismatch}
    <div class="actions">
      <button data-action="close-cycle"${disabled}>close cycle</button>
      <button data-action="advance-phase"${disabled}>advance phase</button>
      <button data-action="release"${disabled}>release</button>
    </div>
  </section>`;
}
