import { ApiClient } from "../api.js";
import { clear, el } from "../dom.js";
import { isTerminal, type EventFeed } from "../events.js";
import { SelectionPanel } from "./selection.js";
import { ProcedureView } from "./procedure.js";
import type {
  IdeasArtifact,
  RankingsArtifact,
  ProcedureDoc,
  RunEvent,
  RunRecord,
  RunStatus,
  TranscriptArtifact,
} from "../types.js";

/** One run's live view: status pill driven by the event feed, a progress
 * line for divergent sampling, the event log, and typed artifact panels
 * that appear once the run reaches them. */
export class RunView {
  readonly root: HTMLElement;
  readonly statusHistory: RunStatus[] = [];
  private statusPill: HTMLElement;
  private progress: HTMLElement;
  private eventLog: HTMLElement;
  private artifactBox: HTMLElement;
  private unsubscribe: () => void = () => {};
  private artifactsLoadedFor: RunStatus | null = null;

  constructor(
    private api: ApiClient,
    private feed: EventFeed,
    private run: RunRecord,
  ) {
    this.statusPill = el("span", { class: "status", "data-test": "status" }, run.status);
    this.progress = el("p", { class: "progress", "data-test": "progress" });
    this.eventLog = el("ul", { class: "event-log", "data-test": "event-log" });
    this.artifactBox = el("div", { class: "artifacts" });
    this.root = el(
      "section",
      { class: "run-view" },
      el("h2", {}, `${run.protocol} `, this.statusPill),
      el("p", { class: "muted" }, run.run_id),
      this.progress,
      this.artifactBox,
      el("details", {}, el("summary", {}, "event log"), this.eventLog),
    );
    this.unsubscribe = this.feed.subscribe(run.run_id, 0, (event) => {
      void this.onEvent(event);
    });
  }

  dispose(): void {
    this.unsubscribe();
  }

  private async onEvent(event: RunEvent): Promise<void> {
    this.eventLog.append(el("li", {}, `${event.seq} ${event.type} ${event.status ?? ""}`));
    if (event.type === "divergent_progress") {
      this.progress.textContent =
        `batch ${event.batches}: ${event.unique_ideas} unique ideas ` +
        `(${event.duplicates_rejected} rejected)`;
    }
    if (event.type === "judge_progress") {
      this.progress.textContent = `judging ${event.criterion}: ${event.scored}/${event.total}`;
    }
    if (event.status) {
      // Rendered status always equals the latest event's status.
      this.statusPill.textContent = event.status;
      this.statusHistory.push(event.status);
      if (event.status === "awaiting_selection" || isTerminal(event.status)) {
        await this.loadArtifacts(event.status);
      }
    }
  }

  private async loadArtifacts(status: RunStatus): Promise<void> {
    if (this.artifactsLoadedFor === status) return;
    this.artifactsLoadedFor = status;
    clear(this.artifactBox);
    this.run = await this.api.getRun(this.run.run_id);

    if (status === "failed") {
      this.artifactBox.append(
        el("p", { class: "error", "data-test": "run-error" }, this.run.error ?? "failed"),
      );
    }
    if (this.run.protocol === "idea_mining") {
      await this.loadMiningArtifacts(status);
    } else if (this.run.protocol === "procedure_design" && status === "done") {
      const doc = await this.api.artifactOrNull<ProcedureDoc>(this.run.run_id, "procedure.json");
      if (doc) {
        const view = new ProcedureView(this.api, this.run.run_id, doc);
        this.artifactBox.append(view.root);
        await view.loadHistory();
      }
    }
  }

  private async loadMiningArtifacts(status: RunStatus): Promise<void> {
    const ideas = await this.api.artifactOrNull<IdeasArtifact>(this.run.run_id, "ideas.json");
    const rankings = await this.api.artifactOrNull<RankingsArtifact>(
      this.run.run_id,
      "rankings.json",
    );
    if (!ideas || !rankings) return;
    const panel = new SelectionPanel(
      this.api,
      this.run.run_id,
      ideas.ideas,
      rankings,
      status,
    );
    this.artifactBox.append(panel.root);

    if (status === "done") {
      const refinements = await this.api.artifactOrNull<
        { idea_id: string; transcript: string; summary: string }[]
      >(this.run.run_id, "refinements.json");
      for (const ref of refinements ?? []) {
        const transcript = await this.api.artifact<TranscriptArtifact>(
          this.run.run_id,
          ref.transcript,
        );
        const thread = el("div", { class: "transcript", "data-test": "transcript" });
        thread.append(el("h4", {}, `Refinement of ${ref.idea_id}`));
        for (const [role, content] of transcript.turns) {
          thread.append(el("div", { class: `turn ${role}` }, el("b", {}, `${role}: `), content));
        }
        thread.append(el("p", { class: "summary" }, el("b", {}, "summary: "), ref.summary));
        this.artifactBox.append(thread);
      }
    }
  }
}
