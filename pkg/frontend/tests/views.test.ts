/** Contract tests against canned responses captured from a live server
 * seeded with the reference replay fixture. */
import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import type { Project, Round, Stats } from "../src/types.js";
import {
  buildRoundView,
  buildTimeline,
  formatScore,
  renderRound,
  renderTimeline,
} from "../src/views.js";

function fixture<T>(name: string): T {
  const path = join(__dirname, "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

const stats = fixture<Stats>("stats.json");
const project = fixture<Project>("project.json");
const roundOpen = fixture<Round>("round-open.json");
const roundClosed = fixture<Round>("round-closed.json");

describe("timeline", () => {
  it("shows cycle badges 2/3/3/2 for the reference project", () => {
    const badges = buildTimeline(stats, project);
    expect(badges.map((b) => b.cycles)).toEqual([2, 3, 3, 2]);
    expect(badges.map((b) => b.phase)).toEqual([
      "problem_statement",
      "data_acquisition",
      "data_management+analysis",
      "reporting",
    ]);
  });

  it("marks the head phase and renders one badge per phase", () => {
    const badges = buildTimeline(stats, project);
    expect(badges.filter((b) => b.current).map((b) => b.phase)).toEqual(["reporting"]);
    const html = renderTimeline(badges);
    expect(html.match(/cycle-badge/g)).toHaveLength(4);
    expect(html).toContain('data-phase="reporting"');
  });
});

describe("round view", () => {
  it("shows a pending ballot and no verdict before quorum", () => {
    const view = buildRoundView(roundOpen, project);
    expect(view.state).toBe("OPEN");
    expect(view.quorumMet).toBe(false);
    expect(view.verdict).toBeNull();
    expect(view.actionsEnabled).toBe(false);
    const byVoter = new Map(view.voters.map((v) => [v.voter, v.status]));
    expect(byVoter.get("R1")).toBe("cast");
    expect(byVoter.get("R0")).toBe("pending");
  });

  it("displays 0.60 / 0.40 for the 0.8 + 0.4 AVERAGE round", () => {
    const view = buildRoundView(roundClosed, project);
    expect(formatScore(view.score)).toBe("0.60");
    expect(formatScore(view.disagreement)).toBe("0.40");
    expect(view.verdict).toBe("ACCEPT");
  });

  it("agrees with the server's stored score and disagreement", () => {
    const view = buildRoundView(roundClosed, project);
    expect(view.serverMismatch).toBe(false);
    expect(view.score).toBeCloseTo(roundClosed.score!, 9);
    expect(view.disagreement).toBeCloseTo(roundClosed.disagreement!, 9);
  });

  it("flags a doctored server value as a mismatch", () => {
    const doctored = { ...roundClosed, score: 0.9 };
    expect(buildRoundView(doctored, project).serverMismatch).toBe(true);
  });

  it("disables gated actions until the verdict is ACCEPT", () => {
    const openHtml = renderRound(buildRoundView(roundOpen, project));
    expect(openHtml).toContain('disabled title="gate not passed"');
    const closedHtml = renderRound(buildRoundView(roundClosed, project));
    expect(closedHtml).not.toContain("disabled");
    expect(closedHtml).toContain('class="verdict accept"');
  });
});
