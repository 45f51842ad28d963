/**
 * Browser entry point: template picker with generated forms, workflow
 * stepper, minted-IRI list, and a live sorted N-Triples preview with a
 * connectivity indicator. All figures shown come from service responses.
 */

import { ApiClient, ApiError } from "./api";
import {
  FieldValue,
  FormField,
  FormModel,
  buildInstanceArgs,
  renderForm,
  validateForm,
} from "./form";
import { WorkflowStepper } from "./stepper";
import type { TemplateEntry, WorkflowInfo } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fieldLabel(field: FormField): string {
  const bits = [field.name];
  if (field.language) bits.push(`@${field.language}`);
  if (field.datatype) bits.push(shorten(field.datatype));
  if (field.required) bits.push("*");
  return bits.join(" ");
}

function shorten(iri: string): string {
  const cut = Math.max(iri.lastIndexOf("#"), iri.lastIndexOf("/"));
  return cut >= 0 ? iri.slice(cut + 1) : iri;
}

class App {
  private api: ApiClient;
  private sessionId = "";
  private templates: TemplateEntry[] = [];
  private workflows: WorkflowInfo[] = [];
  private stepper: WorkflowStepper | null = null;

  private root: HTMLElement;
  private status: HTMLElement;
  private formHost: HTMLElement;
  private preview: HTMLElement;
  private minted: HTMLElement;
  private connectivity: HTMLElement;

  constructor(root: HTMLElement, baseUrl: string) {
    this.api = new ApiClient(baseUrl);
    this.root = root;
    this.status = el("div", "status");
    this.formHost = el("div", "form-host");
    this.preview = el("pre", "triples");
    this.minted = el("ul", "minted");
    this.connectivity = el("span", "connectivity");
  }

  async start(): Promise<void> {
    const session = await this.api.createSession();
    this.sessionId = session.sessionId;
    this.templates = (await this.api.listTemplates()).filter((t) => t.userFacing);
    this.workflows = await this.api.listWorkflows();
    this.render();
  }

  private render(): void {
    this.root.replaceChildren();

    const header = el("header");
    header.append(el("h1", undefined, "Template instantiation"));
    const sessionLine = el("div", "session", `session ${this.sessionId}`);
    header.append(sessionLine);
    this.root.append(header);

    const picker = el("section", "picker");
    picker.append(el("h2", undefined, "Templates"));
    for (const template of this.templates) {
      const button = el("button", "template", shorten(template.iri));
      button.title = template.iri;
      button.addEventListener("click", () => void this.openTemplate(template.iri));
      picker.append(button);
    }
    if (this.workflows.length > 0) {
      picker.append(el("h2", undefined, "Workflows"));
      for (const workflow of this.workflows) {
        const button = el("button", "workflow", workflow.name);
        button.addEventListener("click", () => void this.openWorkflow(workflow.name));
        picker.append(button);
      }
    }
    this.root.append(picker);

    this.root.append(this.status);
    this.root.append(this.formHost);

    const feedback = el("section", "feedback");
    const connRow = el("div", "connectivity-row");
    connRow.append(el("span", undefined, "connected components: "), this.connectivity);
    feedback.append(connRow);
    feedback.append(el("h2", undefined, "Minted identifiers"));
    feedback.append(this.minted);
    feedback.append(el("h2", undefined, "Triples"));
    feedback.append(this.preview);
    this.root.append(feedback);
  }

  private async openTemplate(iri: string): Promise<void> {
    this.stepper = null;
    const schema = await this.api.getSchema(iri);
    const form = renderForm(schema);
    this.renderForm(form, {}, async (values) => {
      const failures = validateForm(form, values);
      if (failures.length > 0) {
        this.renderForm(
          form,
          Object.fromEntries(failures.map((f) => [f.field, f.message])),
          undefined,
          values,
        );
        return;
      }
      const { args, mint } = buildInstanceArgs(form, values);
      try {
        const response = await this.api.postInstance(this.sessionId, {
          template: iri,
          args,
          mint,
        });
        this.setStatus(
          `added ${response.triplesAdded} triples (total ${response.totalTriples})`,
        );
        await this.refreshFeedback(response.connectedComponents, response.mintedIris);
      } catch (error) {
        this.showError(error);
      }
    });
  }

  private async openWorkflow(name: string): Promise<void> {
    this.stepper = new WorkflowStepper(this.api, this.sessionId, name);
    await this.advanceStepper();
  }

  private async advanceStepper(): Promise<void> {
    if (!this.stepper) return;
    const state = await this.stepper.advance();
    if (state.blocked) {
      this.setStatus(`blocked: ${state.blocked}`);
      return;
    }
    if (state.done || !state.form) {
      this.setStatus(`workflow complete: ${state.completed.join(", ")}`);
      this.formHost.replaceChildren();
      return;
    }
    const stepId = state.currentStep?.stepId ?? "?";
    this.setStatus(
      `step ${stepId} (${state.completed.length} done: ${state.completed.join(", ") || "none"})`,
    );
    this.renderForm(state.form, {}, async (values) => {
      const next = await this.stepper!.submit(values);
      if (Object.keys(next.fieldErrors).length > 0) {
        this.renderForm(next.form!, next.fieldErrors, undefined, values);
        return;
      }
      const response = next.lastResponse!;
      if (next.disconnected) {
        this.setStatus("warning: the graph is disconnected after this step");
      } else {
        this.setStatus(`step ${stepId} done, ${response.triplesAdded} triples added`);
      }
      await this.refreshFeedback(response.connectedComponents, next.mintedSoFar);
      await this.advanceStepper();
    });
  }

  private renderForm(
    form: FormModel,
    errors: Record<string, string>,
    onSubmit?: (values: Record<string, FieldValue>) => Promise<void>,
    previous?: Record<string, FieldValue>,
  ): void {
    this.formHost.replaceChildren();
    const heading = el("h2", undefined, shorten(form.templateIri));
    heading.title = form.templateIri;
    this.formHost.append(heading);

    const formEl = el("form");
    const inputs = new Map<string, HTMLInputElement | HTMLTextAreaElement>();

    for (const field of form.fields) {
      const row = el("div", "field");
      row.append(el("label", undefined, fieldLabel(field)));
      if (field.auto) {
        row.append(el("span", "auto", "minted automatically"));
        formEl.append(row);
        continue;
      }
      const input = el("input") as HTMLInputElement;
      input.name = field.name;
      const prior = previous?.[field.name];
      input.value = typeof prior === "string" ? prior : field.prefill ?? "";
      if (field.widget === "reference-picker") {
        input.setAttribute("list", "minted-iris");
        input.placeholder = field.refSource ? `from ${field.refSource}` : "pick a minted IRI";
      } else if (field.example) {
        input.placeholder = field.example;
      }
      if (field.widget === "list-editor") {
        input.placeholder = "comma-separated values";
      }
      inputs.set(field.name, input);
      row.append(input);
      if (field.description) {
        row.append(el("small", "hint", field.description));
      }
      const message = errors[field.name];
      if (message) {
        row.append(el("span", "error", message));
      }
      formEl.append(row);
    }
    if (errors["_form"]) {
      formEl.append(el("div", "error", errors["_form"]));
    }

    const submit = el("button", "submit", "Instantiate");
    submit.type = "submit";
    formEl.append(submit);
    formEl.addEventListener("submit", (event) => {
      event.preventDefault();
      const values: Record<string, FieldValue> = {};
      for (const field of form.fields) {
        const input = inputs.get(field.name);
        if (!input) continue;
        values[field.name] =
          field.widget === "list-editor"
            ? input.value.split(",").map((v) => v.trim()).filter((v) => v !== "")
            : input.value;
      }
      void onSubmit?.(values);
    });
    this.formHost.append(formEl);
  }

  private async refreshFeedback(components: number, minted: string[]): Promise<void> {
    this.connectivity.textContent = String(components);
    this.connectivity.className = components > 1 ? "connectivity warn" : "connectivity";
    this.minted.replaceChildren(...minted.map((iri) => el("li", undefined, iri)));
    const datalist =
      (document.getElementById("minted-iris") as HTMLDataListElement | null) ??
      (() => {
        const list = document.createElement("datalist");
        list.id = "minted-iris";
        document.body.append(list);
        return list;
      })();
    datalist.replaceChildren(
      ...minted.map((iri) => {
        const option = document.createElement("option");
        option.value = `<${iri}>`;
        return option;
      }),
    );
    this.preview.textContent = await this.api.getGraph(this.sessionId);
  }

  private setStatus(text: string): void {
    this.status.textContent = text;
  }

  private showError(error: unknown): void {
    if (error instanceof ApiError) {
      this.setStatus(`error: ${error.message}`);
    } else {
      this.setStatus(`error: ${String(error)}`);
    }
  }
}

export function mount(root: HTMLElement): void {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("api") ?? window.location.origin;
  const app = new App(root, baseUrl);
  void app.start().catch((error) => {
    root.textContent = `failed to reach the service at ${baseUrl}: ${String(error)}`;
  });
}

const rootElement = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootElement) {
  mount(rootElement);
}
