import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { SseFeed } from "./events.js";
import { LaunchForm } from "./views/launch.js";
import { RunView } from "./views/run.js";
import type { RunRecord } from "./types.js";

const api = new ApiClient();
const feed = new SseFeed();

let active: RunView | null = null;

function runRow(run: RunRecord): HTMLElement {
  return el(
    "tr",
    {},
    el("td", {}, el("a", { href: `#/runs/${run.run_id}` }, run.run_id)),
    el("td", {}, run.protocol),
    el("td", {}, el("span", { class: `status status-${run.status}` }, run.status)),
    el("td", {}, run.updated),
  );
}

async function renderHome(root: HTMLElement): Promise<void> {
  clear(root);
  const form = new LaunchForm(api, (run) => {
    location.hash = `#/runs/${run.run_id}`;
  });
  const table = el("table", { class: "run-list" });
  table.append(
    el("tr", {}, el("th", {}, "run"), el("th", {}, "protocol"), el("th", {}, "status"), el("th", {}, "updated")),
  );
  root.append(el("h1", {}, "ideamine"), form.root, el("h2", {}, "Runs"), table);
  try {
    const { runs } = await api.listRuns();
    for (const run of runs.slice().reverse()) table.append(runRow(run));
  } catch (err) {
    root.append(el("p", { class: "error" }, String(err)));
  }
}

async function renderRun(root: HTMLElement, runId: string): Promise<void> {
  clear(root);
  root.append(el("p", {}, el("a", { href: "#" }, "← all runs")));
  try {
    const run = await api.getRun(runId);
    active = new RunView(api, feed, run);
    root.append(active.root);
  } catch (err) {
    root.append(el("p", { class: "error" }, String(err)));
  }
}

async function route(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  active?.dispose();
  active = null;
  const match = location.hash.match(/^#\/runs\/(.+)$/);
  if (match) await renderRun(root, match[1]);
  else await renderHome(root);
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
