// Console state machine.  One session at a time, one submission in
// flight at a time; the active officer always comes from the last view
// the service sent, so the UI cannot submit for a past or future round.

import {
  ApiError,
  CreateSessionBody,
  SessionApi,
  SessionReport,
  SessionState,
} from "./api.js";
import { RankingDraft } from "./ranking.js";
import {
  adminProgressView,
  errorBanner,
  finalView,
  noticeBar,
  officerRoundView,
} from "./views.js";

type Phase = "idle" | "active" | "complete" | "failed";

export class ConsoleApp {
  phase: Phase = "idle";
  state: SessionState | null = null;
  draft: RankingDraft | null = null;
  report: SessionReport | null = null;
  notice: string | null = null;
  failure: string | null = null;
  private inFlight = false;
  private draftRound = -1;
  private source: CreateSessionBody | null = null;
  private pending: Promise<void> | null = null;

  constructor(
    private readonly api: SessionApi,
    private readonly root: HTMLElement,
  ) {}

  /** Wait for whatever asynchronous step is currently running. */
  async settled(): Promise<void> {
    while (this.pending) {
      await this.pending;
    }
  }

  private run(task: () => Promise<void>): Promise<void> {
    const job = task().finally(() => {
      if (this.pending === job) {
        this.pending = null;
      }
    });
    this.pending = job;
    return job;
  }

  start(source: CreateSessionBody): Promise<void> {
    return this.run(async () => {
      this.source = source;
      this.notice = null;
      this.failure = null;
      this.report = null;
      try {
        this.adopt(await this.api.createSession(source));
      } catch (error) {
        this.fail(error);
      }
      this.render();
    });
  }

  refresh(): Promise<void> {
    return this.run(async () => {
      if (!this.state) {
        return;
      }
      try {
        this.adopt(await this.api.getSession(this.state.session_id));
      } catch (error) {
        this.fail(error);
      }
      this.render();
    });
  }

  moveUp(index: number): void {
    if (this.draft && !this.inFlight && this.draft.moveUp(index)) {
      this.render();
    }
  }

  moveDown(index: number): void {
    if (this.draft && !this.inFlight && this.draft.moveDown(index)) {
      this.render();
    }
  }

  submit(): Promise<void> {
    if (this.inFlight) {
      return this.pending ?? Promise.resolve();
    }
    return this.run(() => this.doSubmit());
  }

  private async doSubmit(): Promise<void> {
    const view = this.state?.view;
    if (!this.state || !view || !this.draft) {
      return;
    }
    const menu = view.menu.map((entry) => entry.state);
    if (!this.draft.isPermutationOf(menu)) {
      this.notice = "the draft no longer matches the menu";
      this.render();
      return;
    }
    this.inFlight = true;
    this.notice = null;
    this.render();
    try {
      const result = await this.api.submitRanking(
        this.state.session_id,
        view.officer.id,
        this.draft.toRanking(),
      );
      this.notice = `${result.committed.officer} committed to ${result.committed.state}`;
      // re-read the session so committed steps and the next menu both
      // come from the one canonical source
      this.adopt(await this.api.getSession(this.state.session_id));
      if (this.state.status === "complete") {
        this.report = await this.api.getReport(this.state.session_id);
        this.phase = "complete";
      }
    } catch (error) {
      await this.handleSubmitError(error);
    } finally {
      this.inFlight = false;
    }
    this.render();
  }

  private async handleSubmitError(error: unknown): Promise<void> {
    if (!(error instanceof ApiError)) {
      this.fail(error);
      return;
    }
    switch (error.code) {
      case "busy":
        // someone else's request is mid-flight; nothing was committed
        this.notice = "the session is busy, try again";
        return;
      case "stale_round":
        this.notice = error.expected
          ? `it is ${error.expected}'s turn; view refreshed`
          : "the round moved on; view refreshed";
        await this.resync();
        return;
      case "complete":
        this.notice = "the session had already finished";
        await this.resync();
        return;
      case "invalid_ranking":
        // the service names the menu it expected; restart from that
        if (error.menu) {
          this.draft = new RankingDraft(error.menu);
        }
        this.notice = `ranking rejected: ${error.message}`;
        return;
      default:
        this.fail(error);
    }
  }

  private async resync(): Promise<void> {
    if (!this.state) {
      return;
    }
    try {
      this.adopt(await this.api.getSession(this.state.session_id));
      if (this.state.status === "complete" && !this.report) {
        this.report = await this.api.getReport(this.state.session_id);
        this.phase = "complete";
      }
    } catch (error) {
      this.fail(error);
    }
  }

  private adopt(state: SessionState): void {
    this.state = state;
    if (state.status === "complete") {
      this.phase = "complete";
      this.draft = null;
      this.draftRound = -1;
      return;
    }
    this.phase = "active";
    if (state.view && state.round !== this.draftRound) {
      this.draft = new RankingDraft(state.view.menu.map((entry) => entry.state));
      this.draftRound = state.round;
    }
  }

  private fail(error: unknown): void {
    this.phase = "failed";
    this.failure = error instanceof Error ? error.message : String(error);
  }

  render(): void {
    this.root.replaceChildren();
    if (this.notice) {
      this.root.appendChild(noticeBar(this.notice));
    }
    if (this.phase === "failed") {
      const retry = this.source
        ? () => void this.start(this.source as CreateSessionBody)
        : undefined;
      this.root.appendChild(errorBanner(this.failure ?? "request failed", retry));
      return;
    }
    if (!this.state) {
      return;
    }
    if (this.phase === "complete") {
      if (this.state.allocation) {
        this.root.appendChild(finalView(this.state.allocation, this.report));
      }
      this.root.appendChild(adminProgressView(this.state));
      return;
    }
    if (this.state.view && this.draft) {
      this.root.appendChild(
        officerRoundView(
          this.state.view,
          this.draft,
          {
            onMoveUp: (index) => this.moveUp(index),
            onMoveDown: (index) => this.moveDown(index),
            onSubmit: () => void this.submit(),
          },
          this.inFlight,
        ),
      );
    }
    this.root.appendChild(adminProgressView(this.state));
  }
}
