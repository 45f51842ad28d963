/**
 * Workflow stepper: drives one workflow against one session. Every state
 * transition is triggered by a service response; the client never updates
 * optimistically.
 */

import { ApiClient, ApiError } from "./api";
import {
  FieldValue,
  FormModel,
  buildInstanceArgs,
  renderForm,
  validateForm,
} from "./form";
import type { InstanceResponse, NextStep } from "./types";

export interface StepperState {
  workflow: string;
  currentStep: NextStep | null;
  form: FormModel | null;
  completed: string[];
  done: boolean;
  /** per-field validation or service messages */
  fieldErrors: Record<string, string>;
  /** true when the last response reported a disconnected graph */
  disconnected: boolean;
  /** set when advancing was refused because prerequisites are unmet */
  blocked: string | null;
  lastResponse: InstanceResponse | null;
  mintedSoFar: string[];
}

export class WorkflowStepper {
  state: StepperState;

  constructor(
    private api: ApiClient,
    private sessionId: string,
    workflow: string,
  ) {
    this.state = {
      workflow,
      currentStep: null,
      form: null,
      completed: [],
      done: false,
      fieldErrors: {},
      disconnected: false,
      blocked: null,
      lastResponse: null,
      mintedSoFar: [],
    };
  }

  /** Ask the service for the next step and build its form. */
  async advance(): Promise<StepperState> {
    this.state.blocked = null;
    this.state.fieldErrors = {};
    try {
      const response = await this.api.advanceWorkflow(this.sessionId, this.state.workflow);
      this.state.completed = response.completed;
      this.state.currentStep = response.nextStep;
      this.state.done = response.nextStep === null;
      if (response.nextStep) {
        const schema = await this.api.getSchema(response.nextStep.template);
        this.state.form = renderForm(schema, response.nextStep.bindings);
      } else {
        this.state.form = null;
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.state.blocked = error.message;
      } else {
        throw error;
      }
    }
    return this.state;
  }

  /**
   * Validate and submit the current step's form. Invalid forms set
   * fieldErrors and send nothing.
   */
  async submit(values: Record<string, FieldValue>): Promise<StepperState> {
    const step = this.state.currentStep;
    const form = this.state.form;
    if (!step || !form) {
      throw new Error("no active step to submit");
    }
    const failures = validateForm(form, values);
    if (failures.length > 0) {
      this.state.fieldErrors = Object.fromEntries(
        failures.map((f) => [f.field, f.message]),
      );
      return this.state;
    }
    this.state.fieldErrors = {};
    const { args, mint } = buildInstanceArgs(form, values);
    try {
      const response = await this.api.postInstance(this.sessionId, {
        template: step.template,
        args,
        mint,
        workflow: this.state.workflow,
        step: step.stepId,
      });
      this.state.lastResponse = response;
      this.state.mintedSoFar = [...this.state.mintedSoFar, ...response.mintedIris];
      this.state.disconnected = response.connectedComponents > 1;
      if (!this.state.completed.includes(step.stepId)) {
        this.state.completed = [...this.state.completed, step.stepId];
      }
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        this.state.fieldErrors = mapDiagnosticsToFields(error);
        return this.state;
      }
      throw error;
    }
    return this.state;
  }
}

/** The service phrases argument problems as "parameter 'name': ...". */
export function mapDiagnosticsToFields(error: ApiError): Record<string, string> {
  const errors: Record<string, string> = {};
  for (const diagnostic of error.diagnostics) {
    const match = /parameter '([^']+)'/.exec(diagnostic.message);
    if (match) {
      errors[match[1]] = diagnostic.message;
    } else {
      errors["_form"] = diagnostic.message;
    }
  }
  if (Object.keys(errors).length === 0) {
    errors["_form"] = error.message;
  }
  return errors;
}
