/** Payload shapes of the instantiation service API. */

export type ParamTypeInfo =
  | { kind: "top" }
  | { kind: "iri" }
  | { kind: "literal"; datatype: string }
  | { kind: "list"; element: ParamTypeInfo };

export interface SchemaParameter {
  name: string;
  type: ParamTypeInfo;
  typeLabel: string;
  optional: boolean;
  default: string | null;
  description: string;
  exampleValue: string;
}

export interface TemplateSchema {
  iri: string;
  userFacing: boolean;
  description: string;
  parameters: SchemaParameter[];
}

export interface TemplateEntry {
  iri: string;
  userFacing: boolean;
}

export interface InstanceResponse {
  instanceIndex: number;
  mintedIris: string[];
  triplesAdded: number;
  totalTriples: number;
  connectedComponents: number;
}

export interface Diagnostic {
  severity: string;
  code: string;
  template: string | null;
  message: string;
}

export type BindingInfo =
  | { kind: "const"; value: string }
  | { kind: "mint" }
  | { kind: "ref"; value: string | null; source: string }
  | { kind: "input"; type?: string };

export interface WorkflowStepInfo {
  id: string;
  template: string;
  after: string[];
  bindings: Record<string, string>;
}

export interface WorkflowInfo {
  name: string;
  steps: WorkflowStepInfo[];
}

export interface NextStep {
  stepId: string;
  template: string;
  bindings: Record<string, BindingInfo>;
}

export interface AdvanceResponse {
  nextStep: NextStep | null;
  completed: string[];
}

export interface SessionInfo {
  sessionId: string;
  instances: number;
  totalTriples: number;
  mintedIris: string[];
  connectedComponents: number;
}

export interface InstanceRequest {
  template: string;
  args: string[];
  mint: string[];
  workflow?: string;
  step?: string;
}
