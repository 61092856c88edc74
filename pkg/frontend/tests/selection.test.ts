// Selection round-trip: checked rows post exactly those ids, the panel
// locks after submit, and replayed events drive the status sequence.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReplayFeed } from "../src/events.js";
import { SelectionPanel } from "../src/views/selection.js";
import { RunView } from "../src/views/run.js";
import type { IdeaRecord, RankingsArtifact, RunEvent, RunRecord } from "../src/types.js";
import { stubServer, tick } from "./stub.js";

const RUN_ID = "01TESTRUN0000000000000000";

function tenIdeas(): IdeaRecord[] {
  return Array.from({ length: 10 }, (_, i) => ({
    id: `i${String(i).padStart(4, "0")}`,
    text: `recorded idea ${i}`,
    gen_index: i,
    source_batch: 0,
  }));
}

function rankings(ideas: IdeaRecord[]): RankingsArtifact {
  const novelty = ideas.map((idea, i) => ({
    idea_id: idea.id,
    score: 10 - i,
    rationale: `novelty rationale ${i}`,
  }));
  const effectiveness = [...novelty].reverse().map((e, i) => ({ ...e, score: 10 - i }));
  return { novelty, effectiveness };
}

function record(status: RunRecord["status"]): RunRecord {
  return {
    run_id: RUN_ID,
    protocol: "idea_mining",
    status,
    created: "t0",
    updated: "t1",
    artifacts: ["ideas.json", "rankings.json"],
    error: null,
  };
}

describe("selection panel", () => {
  function panelWith(status = "awaiting_selection") {
    const ideas = tenIdeas();
    const { fetchImpl, requests } = stubServer({
      [`POST /api/runs/${RUN_ID}/select`]: { body: record("refining") },
    });
    const panel = new SelectionPanel(
      new ApiClient(fetchImpl),
      RUN_ID,
      ideas,
      rankings(ideas),
      status,
    );
    document.body.append(panel.root);
    return { panel, requests, ideas };
  }

  function check(panel: SelectionPanel, tab: string, row: number, on = true) {
    const box = panel.root.querySelector<HTMLInputElement>(
      `[data-test=check-${tab}-${row}]`,
    )!;
    box.checked = on;
    box.dispatchEvent(new Event("change"));
  }

  it("posts exactly the checked novelty rows", async () => {
    const { panel, requests, ideas } = panelWith();
    check(panel, "novelty", 1);
    check(panel, "novelty", 3);
    await panel.submit();
    const select = requests.find((r) => r.method === "POST")!;
    // novelty rank 1 is gen index 0, rank 3 is gen index 2
    expect(select.body).toEqual({ idea_ids: [ideas[0].id, ideas[2].id] });
  });

  it("same idea checked in both tabs posts once", async () => {
    const { panel, requests } = panelWith();
    check(panel, "novelty", 1); // best novelty = i0000
    panel.root.querySelector<HTMLButtonElement>("[data-test=tab-effectiveness]")!.click();
    check(panel, "effectiveness", 10); // worst effectiveness = also i0000
    await panel.submit();
    const select = requests.find((r) => r.method === "POST")!;
    expect(select.body).toEqual({ idea_ids: ["i0000"] });
  });

  it("zero selections keep submit disabled and nothing is posted", async () => {
    const { panel, requests } = panelWith();
    const button = panel.root.querySelector<HTMLButtonElement>("[data-test=refine]")!;
    expect(button.disabled).toBe(true);
    await panel.submit();
    expect(requests.filter((r) => r.method === "POST")).toHaveLength(0);
  });

  it("panel disables after a successful submission", async () => {
    const { panel } = panelWith();
    check(panel, "novelty", 2);
    await panel.submit();
    const button = panel.root.querySelector<HTMLButtonElement>("[data-test=refine]")!;
    expect(button.disabled).toBe(true);
    const box = panel.root.querySelector<HTMLInputElement>("[data-test=check-novelty-2]")!;
    expect(box.disabled).toBe(true);
  });

  it("read-only outside awaiting_selection", () => {
    const { panel } = panelWith("done");
    const box = panel.root.querySelector<HTMLInputElement>("[data-test=check-novelty-1]")!;
    expect(box.disabled).toBe(true);
  });
});

describe("run view event replay", () => {
  it("status transitions follow the recorded event order", async () => {
    const ideas = tenIdeas();
    const events: RunEvent[] = [
      { seq: 0, ts: "t", type: "created", status: "pending" },
      { seq: 1, ts: "t", type: "status", status: "divergent" },
      { seq: 2, ts: "t", type: "divergent_progress", batches: 1, unique_ideas: 10, duplicates_rejected: 2 },
      { seq: 3, ts: "t", type: "status", status: "convergent" },
      { seq: 4, ts: "t", type: "status", status: "awaiting_selection" },
      { seq: 5, ts: "t", type: "status", status: "refining" },
      { seq: 6, ts: "t", type: "status", status: "done" },
    ];
    const { fetchImpl } = stubServer({
      [`GET /api/runs/${RUN_ID}`]: { body: record("done") },
      [`GET /api/runs/${RUN_ID}/artifacts/ideas.json`]: { body: { ideas } },
      [`GET /api/runs/${RUN_ID}/artifacts/rankings.json`]: { body: rankings(ideas) },
      [`GET /api/runs/${RUN_ID}/artifacts/refinements.json`]: { body: [] },
    });
    const view = new RunView(new ApiClient(fetchImpl), new ReplayFeed(events), record("pending"));
    document.body.append(view.root);
    await tick(8);

    expect(view.statusHistory).toEqual([
      "pending",
      "divergent",
      "convergent",
      "awaiting_selection",
      "refining",
      "done",
    ]);
    expect(view.root.querySelector("[data-test=status]")!.textContent).toBe("done");
    expect(view.root.querySelector("[data-test=progress]")!.textContent).toContain(
      "10 unique ideas",
    );
  });

  it("replaying the same events yields the same DOM status sequence", async () => {
    const events: RunEvent[] = [
      { seq: 0, ts: "t", type: "created", status: "pending" },
      { seq: 1, ts: "t", type: "status", status: "divergent" },
      { seq: 2, ts: "t", type: "status", status: "failed" },
    ];
    const { fetchImpl } = stubServer({
      [`GET /api/runs/${RUN_ID}`]: { body: record("failed") },
      [`GET /api/runs/${RUN_ID}/artifacts/ideas.json`]: { status: 404, body: {} },
      [`GET /api/runs/${RUN_ID}/artifacts/rankings.json`]: { status: 404, body: {} },
    });

    async function render(): Promise<string[]> {
      const view = new RunView(
        new ApiClient(fetchImpl),
        new ReplayFeed(events),
        record("pending"),
      );
      await tick(6);
      return [...view.statusHistory];
    }

    expect(await render()).toEqual(await render());
  });
});
