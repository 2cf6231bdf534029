/** Thin typed client over the service's HTTP API. */
import type { Project, Release, Round, Stats } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string,
    private author: string | null = null,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  setAuthor(author: string): void {
    this.author = author;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers = new Headers(init.headers);
    if (init.method && init.method !== "GET") {
      if (!this.author) {
        throw new ApiError(400, "AuthorRequired", "select a researcher first");
      }
      headers.set("X-Curator-Author", this.author);
      if (init.body && !headers.has("Content-Type")) {
        headers.set("Content-Type", "application/json");
      }
    }
    const resp = await this.fetchImpl(this.base + path, { ...init, headers });
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body.error ?? "Unknown", body.message ?? "");
    }
    return body as T;
  }

  project(): Promise<Project> {
    return this.request("/project");
  }

  stats(): Promise<Stats> {
    return this.request("/stats");
  }

  releases(): Promise<Release[]> {
    return this.request("/releases");
  }

  rounds(): Promise<Round[]> {
    return this.request("/rounds");
  }

  round(id: string): Promise<Round> {
    return this.request(`/rounds/${id}`);
  }

  /** Long-poll: resolves once more than `since` ballots exist or the
   * round closes, or after the server timeout with the current state. */
  roundSince(id: string, since: number): Promise<Round> {
    return this.request(`/rounds/${id}?since=${since}`);
  }

  openRound(kind: string, extra: Record<string, unknown> = {}): Promise<Round> {
    return this.request("/rounds", {
      method: "POST",
      body: JSON.stringify({ kind, ...extra }),
    });
  }

  vote(id: string, pref: number, credits: number | null = null): Promise<Round> {
    return this.request(`/rounds/${id}/votes`, {
      method: "POST",
      body: JSON.stringify(credits === null ? { pref } : { pref, credits }),
    });
  }

  closeRound(id: string): Promise<Round> {
    return this.request(`/rounds/${id}/close`, { method: "POST" });
  }

  closeCycle(round: string): Promise<unknown> {
    return this.request("/cycles/close", {
      method: "POST",
      body: JSON.stringify({ round }),
    });
  }

  advancePhase(round: string, release?: string): Promise<unknown> {
    return this.request("/phases/advance", {
      method: "POST",
      body: JSON.stringify(release ? { round, release } : { round }),
    });
  }
}
