import { ApiClient, ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import type { FieldError, RunRecord } from "../types.js";

type Protocol = "idea_mining" | "procedure_design";

/** Launch form for new runs. Client-side validation mirrors the server
 * schema; server-side 400s land inline at the offending field, and
 * transport failures never wipe what was typed. */
export class LaunchForm {
  readonly root: HTMLElement;
  private protocol: Protocol = "idea_mining";
  private banner: HTMLElement;
  private fieldsBox: HTMLElement;
  private inputs = new Map<string, HTMLInputElement>();
  private errors = new Map<string, HTMLElement>();

  constructor(
    private api: ApiClient,
    private onLaunched: (run: RunRecord) => void,
  ) {
    this.banner = el("p", { class: "error banner", hidden: true });
    this.fieldsBox = el("div", { class: "fields" });
    const select = el("select", {
      "data-test": "protocol",
      onchange: (e) => {
        this.protocol = (e.target as HTMLSelectElement).value as Protocol;
        this.renderFields();
      },
    });
    select.append(
      el("option", { value: "idea_mining" }, "idea mining"),
      el("option", { value: "procedure_design" }, "procedure design"),
    );
    this.root = el(
      "form",
      {
        class: "launch",
        onsubmit: (e) => {
          e.preventDefault();
          void this.submit();
        },
      },
      el("h2", {}, "New run"),
      el("label", {}, "protocol ", select),
      this.fieldsBox,
      this.banner,
      el("button", { type: "submit", "data-test": "launch" }, "launch"),
    );
    this.renderFields();
  }

  private field(name: string, label: string, attrs: Record<string, string> = {}): HTMLElement {
    const input = el("input", { name, "data-test": `field-${name}`, ...attrs });
    const error = el("span", { class: "error field-error", "data-test": `error-${name}` });
    this.inputs.set(name, input);
    this.errors.set(name, error);
    return el("label", { class: "field" }, `${label} `, input, error);
  }

  private renderFields(): void {
    clear(this.fieldsBox);
    this.inputs.clear();
    this.errors.clear();
    this.fieldsBox.append(this.field("prompt", "prompt", { type: "text" }));
    if (this.protocol === "idea_mining") {
      this.fieldsBox.append(this.field("target_n", "ideas wanted (n)", { type: "number", value: "10" }));
    } else {
      this.fieldsBox.append(
        this.field("qa_count", "grounding Q-A pairs", { type: "number", value: "5" }),
        this.field("no_qa", "skip Q-A (ablation)", { type: "checkbox" }),
        this.field("single_agent", "single agent (ablation)", { type: "checkbox" }),
      );
    }
  }

  value(name: string): string {
    return this.inputs.get(name)?.value ?? "";
  }

  checked(name: string): boolean {
    return this.inputs.get(name)?.checked ?? false;
  }

  /** Client-side mirror of the server's request schema. */
  validate(): FieldError[] {
    const errors: FieldError[] = [];
    if (!this.value("prompt").trim()) {
      errors.push({ field: "prompt", message: "required non-empty string" });
    }
    if (this.protocol === "idea_mining") {
      const n = Number(this.value("target_n"));
      if (!Number.isInteger(n) || n < 1) {
        errors.push({ field: "target_n", message: "required integer >= 1" });
      }
    } else if (!this.checked("no_qa")) {
      const qa = Number(this.value("qa_count"));
      if (!Number.isInteger(qa) || qa < 1) {
        errors.push({ field: "qa_count", message: "must be an integer >= 1 (or use no_qa)" });
      }
    }
    return errors;
  }

  /** The exact body POSTed to /api/runs; no extra fields. */
  requestBody(): Record<string, unknown> {
    if (this.protocol === "idea_mining") {
      return {
        protocol: "idea_mining",
        prompt: this.value("prompt"),
        target_n: Number(this.value("target_n")),
      };
    }
    const body: Record<string, unknown> = {
      protocol: "procedure_design",
      prompt: this.value("prompt"),
    };
    if (this.checked("no_qa")) body.no_qa = true;
    else body.qa_count = Number(this.value("qa_count"));
    if (this.checked("single_agent")) body.single_agent = true;
    return body;
  }

  private showFieldErrors(errors: FieldError[]): void {
    for (const box of this.errors.values()) box.textContent = "";
    for (const { field, message } of errors) {
      const box = this.errors.get(field);
      if (box) box.textContent = message;
      else this.showBanner(`${field}: ${message}`);
    }
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = !message;
  }

  async submit(): Promise<void> {
    this.showBanner("");
    const errors = this.validate();
    this.showFieldErrors(errors);
    if (errors.length > 0) return; // nothing is sent on client-side failure
    try {
      const run = await this.api.createRun(this.requestBody());
      this.onLaunched(run);
    } catch (err) {
      if (err instanceof ApiError && err.fieldErrors.length > 0) {
        this.showFieldErrors(err.fieldErrors);
      } else {
        this.showBanner(err instanceof Error ? err.message : String(err));
      }
    }
  }
}
