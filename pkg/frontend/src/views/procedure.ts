import { ApiClient } from "../api.js";
import { diffSteps } from "../diff.js";
import { clear, el } from "../dom.js";
import type { FollowupEntry, ProcedureDoc } from "../types.js";

function renderDoc(doc: ProcedureDoc): HTMLElement {
  const materials = el("ul", {});
  doc.materials.forEach((m) => materials.append(el("li", {}, m)));
  const steps = el("ol", { "data-test": "steps" });
  doc.steps.forEach((s) => steps.append(el("li", {}, s)));
  const notes = el("ul", {});
  doc.notes.forEach((n) => notes.append(el("li", {}, n)));
  return el(
    "article",
    { class: "procedure" },
    el("h3", { "data-test": "procedure-title" }, doc.title),
    el("h4", {}, "Materials"),
    materials,
    el("h4", {}, "Steps"),
    steps,
    el("h4", {}, "Notes"),
    notes,
  );
}

function renderDiff(before: string[], after: string[]): HTMLElement {
  const list = el("ul", { class: "diff", "data-test": "diff" });
  for (const op of diffSteps(before, after)) {
    const marker = op.kind === "added" ? "+ " : op.kind === "removed" ? "- " : "  ";
    list.append(el("li", { class: `diff-${op.kind}`, "data-kind": op.kind }, marker + op.text));
  }
  return list;
}

/** Procedure reader plus the follow-up chat.
 *
 * Chat history is server state (followups.json); reloading the view
 * replays it, fetching each saved revision to rebuild the diffs. A failed
 * send keeps the draft question in the box.
 */
export class ProcedureView {
  readonly root: HTMLElement;
  private docBox: HTMLElement;
  private thread: HTMLElement;
  private input: HTMLInputElement;
  private currentDoc: ProcedureDoc;

  constructor(
    private api: ApiClient,
    private runId: string,
    doc: ProcedureDoc,
  ) {
    this.currentDoc = doc;
    this.docBox = el("div", {});
    this.thread = el("div", { class: "chat-thread", "data-test": "chat" });
    this.input = el("input", {
      type: "text",
      placeholder: "ask a follow-up question",
      "data-test": "question",
    }) as HTMLInputElement;
    const send = el(
      "button",
      {
        "data-test": "send",
        onclick: (e) => {
          e.preventDefault();
          void this.send();
        },
      },
      "send",
    );
    this.root = el(
      "section",
      { class: "procedure-view" },
      this.docBox,
      el("h4", {}, "Follow-up"),
      this.thread,
      el("form", { class: "chat-input", onsubmit: (e) => e.preventDefault() }, this.input, send),
    );
    this.renderDoc();
  }

  private renderDoc(): void {
    clear(this.docBox);
    this.docBox.append(renderDoc(this.currentDoc));
  }

  private bubble(kind: "question" | "answer", text: string): HTMLElement {
    return el("div", { class: `bubble ${kind}`, "data-test": `bubble-${kind}` }, text);
  }

  private applyRevision(revised: ProcedureDoc): void {
    const diff = renderDiff(this.currentDoc.steps, revised.steps);
    this.thread.append(
      el("div", { class: "revision" }, el("p", {}, `revised: ${revised.title}`), diff),
    );
    this.currentDoc = revised;
    this.renderDoc();
  }

  /** Rebuild the chat from persisted artifacts (page reload path). */
  async loadHistory(): Promise<void> {
    const history = await this.api.artifactOrNull<FollowupEntry[]>(
      this.runId,
      "followups.json",
    );
    if (!history) return;
    for (const entry of history) {
      this.thread.append(this.bubble("question", entry.question));
      this.thread.append(this.bubble("answer", entry.answer));
      if (entry.revision) {
        const revised = await this.api.artifact<ProcedureDoc>(this.runId, entry.revision);
        this.applyRevision(revised);
      }
    }
  }

  async send(): Promise<void> {
    const question = this.input.value.trim();
    if (!question) return;
    try {
      const result = await this.api.followup(this.runId, question);
      this.thread.append(this.bubble("question", question));
      this.thread.append(this.bubble("answer", result.answer));
      if (result.revised) this.applyRevision(result.revised);
      this.input.value = ""; // only cleared on success
    } catch (err) {
      this.thread.append(
        el(
          "div",
          { class: "bubble error", "data-test": "bubble-error" },
          err instanceof Error ? err.message : String(err),
        ),
      );
    }
  }
}
