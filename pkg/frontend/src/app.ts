/** Dashboard entry point: wires the API client to the DOM. */
import { ApiClient, ApiError } from "./api.js";
import type { Project, Round } from "./types.js";
import {
  buildRoundView,
  buildTimeline,
  formatScore,
  renderRound,
  renderTimeline,
} from "./views.js";

const API_BASE = new URL("..", window.location.href).href.replace(/\/$/, "");

class Dashboard {
  private api = new ApiClient(API_BASE);
  private project: Project | null = null;
  private selected: Round | null = null;
  private polling = 0;

  constructor(private root: HTMLElement) {}

  async start(): Promise<void> {
    this.root.innerHTML = `
      <header>
        <h1 id="project-name"></h1>
        <label>acting as
          <select id="author"></select>
        </label>
      </header>
      <div id="banner" hidden></div>
      <nav id="timeline"></nav>
      <main>
        <section id="rounds"><h2>Rounds</h2><ul id="round-list"></ul></section>
        <section id="round-panel"></section>
      </main>
      <footer>
        <form id="vote-form">
          <label>preference
            <input type="range" id="pref-slider" min="0" max="1" step="0.01" value="0.5">
            <input type="number" id="pref-number" min="0" max="1" step="0.01" value="0.50">
          </label>
          <label>credits <input type="number" id="credits" min="1" step="1"></label>
          <button type="submit">cast vote</button>
        </form>
      </footer>`;
    this.wireForm();
    await this.refresh();
  }

  private banner(message: string | null): void {
    const el = this.root.querySelector<HTMLElement>("#banner")!;
    el.hidden = message === null;
    el.textContent = message ?? "";
  }

  private async refresh(): Promise<void> {
    try {
      const [project, stats, rounds] = await Promise.all([
        this.api.project(),
        this.api.stats(),
        this.api.rounds(),
      ]);
      this.project = project;
      this.banner(null);
      this.root.querySelector("#project-name")!.textContent = project.project;
      const select = this.root.querySelector<HTMLSelectElement>("#author")!;
      select.innerHTML = project.roster
        .map((r) => `<option value="${r.id}">${r.displayName}</option>`)
        .join("");
      select.onchange = () => this.api.setAuthor(select.value);
      this.api.setAuthor(select.value);
      this.root.querySelector("#timeline")!.innerHTML = renderTimeline(
        buildTimeline(stats, project),
      );
      this.renderRoundList(rounds);
      if (this.selected) {
        const fresh = rounds.find((r) => r.id === this.selected!.id);
        if (fresh) this.select(fresh);
      }
    } catch (err) {
      this.banner(`connection lost — retrying (${String(err)})`);
      window.setTimeout(() => void this.refresh(), 2000);
    }
  }

  private renderRoundList(rounds: Round[]): void {
    const list = this.root.querySelector<HTMLElement>("#round-list")!;
    list.innerHTML = rounds
      .map(
        (r) => `<li><a href="#" data-round-id="${r.id}">
          ${r.subject.kind} — ${r.state}${r.verdict ? ` (${r.verdict})` : ""}
        </a></li>`,
      )
      .join("\n");
    for (const link of list.querySelectorAll<HTMLAnchorElement>("a[data-round-id]")) {
      link.onclick = (ev) => {
        ev.preventDefault();
        const id = link.dataset.roundId!;
        void this.api.round(id).then((round) => this.select(round));
      };
    }
  }

  private select(round: Round): void {
    this.selected = round;
    const panel = this.root.querySelector<HTMLElement>("#round-panel")!;
    panel.innerHTML = renderRound(buildRoundView(round, this.project));
    for (const button of panel.querySelectorAll<HTMLButtonElement>("button[data-action]")) {
      button.onclick = () => void this.runAction(button.dataset.action!, round);
    }
    if (round.state === "OPEN") this.longPoll(round);
  }

  private longPoll(round: Round): void {
    const token = ++this.polling;
    void this.api.roundSince(round.id, round.ballots.length).then((fresh) => {
      if (token !== this.polling) return; // a newer selection superseded us
      this.select(fresh);
    });
  }

  private async runAction(action: string, round: Round): Promise<void> {
    try {
      if (round.state === "OPEN") await this.api.closeRound(round.id);
      if (action === "close-cycle") await this.api.closeCycle(round.id);
      else if (action === "advance-phase") await this.api.advancePhase(round.id);
      else if (action === "release") {
        const tag = window.prompt("release tag");
        if (tag) await this.api.advancePhase(round.id, tag);
      }
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale round: re-fetch and re-render with current server state
        this.select(await this.api.round(round.id));
      }
      this.banner(`${String(err)}`);
    }
  }

  private wireForm(): void {
    const slider = this.root.querySelector<HTMLInputElement>("#pref-slider")!;
    const number = this.root.querySelector<HTMLInputElement>("#pref-number")!;
    slider.oninput = () => {
      number.value = formatScore(Number(slider.value));
    };
    number.oninput = () => {
      slider.value = number.value;
    };
    const form = this.root.querySelector<HTMLFormElement>("#vote-form")!;
    form.onsubmit = (ev) => {
      ev.preventDefault();
      if (!this.selected) return;
      const credits = this.root.querySelector<HTMLInputElement>("#credits")!.value;
      void this.api
        .vote(this.selected.id, Number(number.value), credits ? Number(credits) : null)
        .then((round) => this.select(round)) // optimistic: own ballot lands immediately
        .catch((err) => this.banner(String(err)));
    };
  }
}

const root = document.querySelector<HTMLElement>("#app");
if (root) void new Dashboard(root).start();
