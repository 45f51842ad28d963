/**
 * Turns a template schema (plus optional workflow bindings) into a flat form
 * model, and converts submitted field values back into the term strings and
 * mint lists the instances endpoint expects.
 *
 * Widget selection: IRI parameters get an iri-input (or a reference-picker
 * when a workflow binds them by reference), plain strings a text box, other
 * literals a typed-literal input, and list parameters a list editor over
 * their element widget. The form never fabricates triples or connectivity
 * facts; those only come back from the service.
 */

import type { BindingInfo, ParamTypeInfo, TemplateSchema } from "./types";

export type Widget =
  | "iri-input"
  | "text"
  | "typed-literal"
  | "list-editor"
  | "reference-picker";

export interface FormField {
  name: string;
  widget: Widget;
  required: boolean;
  default: string | null;
  description: string;
  example: string;
  /** for typed-literal: language tag or datatype label to apply */
  language?: string;
  datatype?: string;
  /** for list-editor: the widget of one element */
  elementWidget?: Widget;
  /** minted by the service; the field is not entered by the user */
  auto: boolean;
  /** value fixed or suggested by a workflow binding */
  prefill: string | null;
  /** reference-picker: where the suggested value came from */
  refSource?: string;
}

export interface FormModel {
  templateIri: string;
  fields: FormField[];
}

const RDF_LANGSTRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
const XSD_STRING = "http://www.w3.org/2001/XMLSchema#string";

function widgetFor(type: ParamTypeInfo): Widget {
  switch (type.kind) {
    case "iri":
      return "iri-input";
    case "literal":
      return type.datatype === XSD_STRING ? "text" : "typed-literal";
    case "list":
      return "list-editor";
    case "top":
      return "text";
  }
}

export function renderForm(
  schema: TemplateSchema,
  bindings?: Record<string, BindingInfo>,
): FormModel {
  const fields = schema.parameters.map((param) => {
    const binding = bindings?.[param.name];
    let widget = widgetFor(param.type);
    if (binding?.kind === "ref" && widget === "iri-input") {
      widget = "reference-picker";
    }
    const field: FormField = {
      name: param.name,
      widget,
      required: !param.optional && param.default === null,
      default: param.default,
      description: param.description,
      example: param.exampleValue,
      auto: binding?.kind === "mint",
      prefill: param.default,
    };
    if (param.type.kind === "literal") {
      if (param.type.datatype === RDF_LANGSTRING) {
        field.language = "en";
      } else if (param.type.datatype !== XSD_STRING) {
        field.datatype = param.type.datatype;
      }
    }
    if (param.type.kind === "list") {
      field.elementWidget = widgetFor(param.type.element);
    }
    if (binding?.kind === "const") {
      field.prefill = binding.value;
    } else if (binding?.kind === "ref") {
      field.prefill = binding.value;
      field.refSource = binding.source;
    }
    return field;
  });
  return { templateIri: schema.iri, fields };
}

/** One submitted value: a string for scalar widgets, an array for lists. */
export type FieldValue = string | string[];

export interface ValidationError {
  field: string;
  message: string;
}

export function validateForm(
  form: FormModel,
  values: Record<string, FieldValue>,
): ValidationError[] {
  const errors: ValidationError[] = [];
  for (const field of form.fields) {
    if (field.auto) {
      continue;
    }
    const value = values[field.name] ?? field.prefill ?? "";
    const empty = Array.isArray(value) ? value.length === 0 : value.trim() === "";
    if (field.required && empty) {
      errors.push({ field: field.name, message: "required" });
    }
  }
  return errors;
}

function escapeLexical(text: string): string {
  return text
    .replace(/\\/g, "\\\\")
    .replace(/"/g, '\\"')
    .replace(/\n/g, "\\n")
    .replace(/\r/g, "\\r")
    .replace(/\t/g, "\\t");
}

function iriTerm(value: string): string {
  const trimmed = value.trim();
  if (trimmed.startsWith("<") && trimmed.endsWith(">")) {
    return trimmed;
  }
  if (/^[A-Za-z][A-Za-z0-9+.-]*:\/\//.test(trimmed) || trimmed.startsWith("urn:")) {
    return `<${trimmed}>`;
  }
  return trimmed; // assume a prefixed name the service can resolve
}

function scalarTerm(field: FormField, value: string): string {
  const trimmed = value.trim();
  switch (field.widget) {
    case "iri-input":
    case "reference-picker":
      return iriTerm(trimmed);
    case "text":
      return `"${escapeLexical(trimmed)}"`;
    case "typed-literal":
      if (field.language) {
        return `"${escapeLexical(trimmed)}"@${field.language}`;
      }
      if (field.datatype) {
        return `"${escapeLexical(trimmed)}"^^<${field.datatype}>`;
      }
      return `"${escapeLexical(trimmed)}"`;
    default:
      return trimmed;
  }
}

export interface InstanceArgs {
  args: string[];
  mint: string[];
}

/**
 * Assemble the instances-endpoint payload: one argument per parameter in
 * signature order, minted parameters listed separately with a placeholder
 * argument, and empty optional fields sent as `none`.
 *
 * Prefills (defaults, const and ref bindings) are already complete term
 * strings, so a field left at its prefill is passed through verbatim; only
 * user-entered text is converted according to the field's widget.
 */
export function buildInstanceArgs(
  form: FormModel,
  values: Record<string, FieldValue>,
): InstanceArgs {
  const args: string[] = [];
  const mint: string[] = [];
  for (const field of form.fields) {
    if (field.auto) {
      mint.push(field.name);
      args.push("");
      continue;
    }
    const value = values[field.name];
    if (value === undefined || (typeof value === "string" && value === field.prefill)) {
      const prefill = field.prefill ?? "";
      args.push(prefill.trim() === "" ? "none" : prefill);
      continue;
    }
    if (Array.isArray(value)) {
      const element: FormField = { ...field, widget: field.elementWidget ?? "text" };
      args.push("(" + value.map((v) => scalarTerm(element, v)).join(", ") + ")");
      continue;
    }
    if (value.trim() === "") {
      args.push("none");
      continue;
    }
    args.push(scalarTerm(field, value));
  }
  return { args, mint };
}
