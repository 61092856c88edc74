// Launch form: client validation mirrors the server schema; server 400s
// render at the offending field; transport failures keep form state.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { LaunchForm } from "../src/views/launch.js";
import type { RunRecord } from "../src/types.js";
import { stubServer } from "./stub.js";

const CREATED: RunRecord = {
  run_id: "01NEWRUN00000000000000000",
  protocol: "idea_mining",
  status: "pending",
  created: "t",
  updated: "t",
  artifacts: [],
  error: null,
};

function setValue(form: LaunchForm, name: string, value: string) {
  const input = form.root.querySelector<HTMLInputElement>(`[data-test=field-${name}]`)!;
  input.value = value;
}

describe("launch form", () => {
  it("posts exactly the schema fields", async () => {
    const { fetchImpl, requests } = stubServer({
      "POST /api/runs": { status: 201, body: CREATED },
    });
    let launched: RunRecord | null = null;
    const form = new LaunchForm(new ApiClient(fetchImpl), (run) => (launched = run));
    setValue(form, "prompt", "new pollen materials");
    setValue(form, "target_n", "5");
    await form.submit();

    expect(requests[0].body).toEqual({
      protocol: "idea_mining",
      prompt: "new pollen materials",
      target_n: 5,
    });
    expect(launched).not.toBeNull();
    expect(launched!.run_id).toBe(CREATED.run_id);
  });

  it("n=0 renders an inline error and sends nothing", async () => {
    const { fetchImpl, requests } = stubServer({});
    const form = new LaunchForm(new ApiClient(fetchImpl), () => {});
    setValue(form, "prompt", "p");
    setValue(form, "target_n", "0");
    await form.submit();

    expect(requests).toHaveLength(0);
    const error = form.root.querySelector("[data-test=error-target_n]")!;
    expect(error.textContent).toContain(">= 1");
  });

  it("server 400 lands at the named field", async () => {
    const { fetchImpl } = stubServer({
      "POST /api/runs": {
        status: 400,
        body: { errors: [{ field: "target_n", message: "required integer >= 1" }] },
      },
    });
    const form = new LaunchForm(new ApiClient(fetchImpl), () => {});
    setValue(form, "prompt", "p");
    setValue(form, "target_n", "7"); // passes client checks; server still rejects
    await form.submit();

    const error = form.root.querySelector("[data-test=error-target_n]")!;
    expect(error.textContent).toBe("required integer >= 1");
  });

  it("transport failure shows a banner and keeps the draft", async () => {
    const failing = () => Promise.reject(new Error("connection refused"));
    const form = new LaunchForm(new ApiClient(failing), () => {});
    setValue(form, "prompt", "precious draft");
    setValue(form, "target_n", "3");
    await form.submit();

    const banner = form.root.querySelector(".banner")!;
    expect(banner.textContent).toContain("connection refused");
    expect(form.value("prompt")).toBe("precious draft");
  });

  it("procedure design body carries the ablation flags", async () => {
    const { fetchImpl, requests } = stubServer({
      "POST /api/runs": { status: 201, body: { ...CREATED, protocol: "procedure_design" } },
    });
    const form = new LaunchForm(new ApiClient(fetchImpl), () => {});
    const select = form.root.querySelector<HTMLSelectElement>("[data-test=protocol]")!;
    select.value = "procedure_design";
    select.dispatchEvent(new Event("change"));
    setValue(form, "prompt", "leaf paper");
    const noQa = form.root.querySelector<HTMLInputElement>("[data-test=field-no_qa]")!;
    noQa.checked = true;
    await form.submit();

    expect(requests[0].body).toEqual({
      protocol: "procedure_design",
      prompt: "leaf paper",
      no_qa: true,
    });
  });
});
