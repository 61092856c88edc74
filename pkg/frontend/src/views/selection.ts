import { ApiClient, ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import type { IdeaRecord, RankEntry, RankingsArtifact, RunRecord } from "../types.js";

/** Ranked-list tabs with checkbox selection feeding POST /select.
 *
 * Both tabs (novelty / effectiveness) select into one id set, so checking
 * the same idea in both places posts it once. The panel disables itself
 * after a successful submission; a WrongState reply re-syncs the view.
 */
export class SelectionPanel {
  readonly root: HTMLElement;
  readonly selection = new Set<string>();
  private tab: "novelty" | "effectiveness" = "novelty";
  private tableBox: HTMLElement;
  private submitButton: HTMLButtonElement;
  private status: HTMLElement;
  private enabled: boolean;
  private ideaText = new Map<string, string>();

  constructor(
    private api: ApiClient,
    private runId: string,
    ideas: IdeaRecord[],
    private rankings: RankingsArtifact,
    runStatus: string,
    private onStateChange: (run: RunRecord) => void = () => {},
  ) {
    this.enabled = runStatus === "awaiting_selection";
    for (const idea of ideas) this.ideaText.set(idea.id, idea.text);

    this.tableBox = el("div", { class: "ranking-table" });
    this.status = el("p", { class: "selection-status", "data-test": "selection-status" });
    this.submitButton = el(
      "button",
      {
        "data-test": "refine",
        onclick: (e) => {
          e.preventDefault();
          void this.submit();
        },
      },
      "refine selected",
    ) as HTMLButtonElement;

    const tabs = el(
      "div",
      { class: "tabs" },
      this.tabButton("novelty"),
      this.tabButton("effectiveness"),
    );
    this.root = el(
      "section",
      { class: "selection-panel" },
      el("h3", {}, "Ranked ideas"),
      tabs,
      this.tableBox,
      el("div", { class: "selection-actions" }, this.submitButton, this.status),
    );
    this.renderTable();
    this.updateControls();
  }

  private tabButton(name: "novelty" | "effectiveness"): HTMLElement {
    return el(
      "button",
      {
        type: "button",
        "data-test": `tab-${name}`,
        onclick: () => {
          this.tab = name;
          this.renderTable();
        },
      },
      name,
    );
  }

  private renderTable(): void {
    clear(this.tableBox);
    const entries: RankEntry[] = this.rankings[this.tab];
    const table = el("table", { "data-test": `table-${this.tab}` });
    table.append(
      el(
        "tr",
        {},
        el("th", {}, ""),
        el("th", {}, "rank"),
        el("th", {}, "score"),
        el("th", {}, "idea"),
      ),
    );
    entries.forEach((entry, index) => {
      const checkbox = el("input", {
        type: "checkbox",
        "data-test": `check-${this.tab}-${index + 1}`,
        onchange: (e) => {
          const on = (e.target as HTMLInputElement).checked;
          if (on) this.selection.add(entry.idea_id);
          else this.selection.delete(entry.idea_id);
          this.updateControls();
        },
      }) as HTMLInputElement;
      checkbox.checked = this.selection.has(entry.idea_id);
      checkbox.disabled = !this.enabled;
      const rationale = el(
        "details",
        { class: "rationale" },
        el("summary", {}, "rationale"),
        entry.rationale,
      );
      table.append(
        el(
          "tr",
          { "data-idea": entry.idea_id },
          el("td", {}, checkbox),
          el("td", {}, String(index + 1)),
          el("td", {}, String(entry.score)),
          el("td", {}, el("div", {}, this.ideaText.get(entry.idea_id) ?? entry.idea_id), rationale),
        ),
      );
    });
    this.tableBox.append(table);
  }

  private updateControls(): void {
    this.submitButton.disabled = !this.enabled || this.selection.size === 0;
    if (!this.enabled) {
      this.status.textContent = "selection closed";
    } else {
      this.status.textContent = `${this.selection.size} selected`;
    }
  }

  /** Posted ids: the shared selection set, insertion-ordered. */
  selectedIds(): string[] {
    return [...this.selection];
  }

  async submit(): Promise<void> {
    if (!this.enabled || this.selection.size === 0) return;
    try {
      const run = await this.api.selectIdeas(this.runId, this.selectedIds());
      this.enabled = false;
      this.renderTable();
      this.updateControls();
      this.status.textContent = `refining ${this.selection.size} idea(s)`;
      this.onStateChange(run);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // The run moved on without us; re-sync instead of retrying.
        const run = await this.api.getRun(this.runId);
        this.enabled = run.status === "awaiting_selection";
        this.renderTable();
        this.updateControls();
        this.onStateChange(run);
      } else {
        this.status.textContent = err instanceof Error ? err.message : String(err);
      }
    }
  }
}
