/** Problem-selection form logic: schema-driven fields, validation, and the
 * compute-request assembly. Pure functions so the behavior is unit-testable
 * without a DOM.
 */

import { CatalogEntry, ComputeRequest } from "./api.js";

export interface FieldState {
  name: string;
  kind: "number" | "vector";
  values: number[];
  min: number;
  max: number;
  doc?: string;
}

export const COST_WARNING =
  "Cost landscapes rank every cell against every other cell and are " +
  "computationally much more expensive than the other views.";

export function buildFields(entry: CatalogEntry): FieldState[] {
  return entry.params.map((schema) => {
    const fallback = schema.default;
    const raw = entry.defaults[schema.name] ?? fallback;
    const values = Array.isArray(raw) ? raw.map(Number) : [Number(raw)];
    return {
      name: schema.name,
      kind: schema.type === "vector" ? "vector" : "number",
      values,
      min: schema.min,
      max: schema.max,
      doc: schema.doc,
    };
  });
}

export function defaultResolution(entry: CatalogEntry): number[] {
  return [...entry.default_resolution];
}

/** Per-field validation messages, empty when the form may be submitted. */
export function validateFields(fields: FieldState[],
                               resolution: number[],
                               p: number): string[] {
  const errors: string[] = [];
  for (const field of fields) {
    for (const value of field.values) {
      if (!Number.isFinite(value)) {
        errors.push(`${field.name}: not a number`);
        break;
      }
      if (value < field.min || value > field.max) {
        errors.push(`${field.name}: must be within [${field.min}, ${field.max}]`);
        break;
      }
    }
  }
  if (resolution.length !== p) {
    errors.push(`resolution needs ${p} entries`);
  } else if (resolution.some((n) => !Number.isInteger(n) || n < 2)) {
    errors.push("resolution entries must be integers >= 2");
  }
  return errors;
}

/** The expense warning shown next to the cost checkbox, and whether the
 * request additionally needs the force flag (large tri-objective grids). */
export function costWarning(entry: CatalogEntry, resolution: number[],
                            methods: string[]): { text: string; needsForce: boolean } | null {
  if (!methods.includes("cost")) return null;
  const cells = resolution.reduce((a, b) => a * b, 1);
  const needsForce = entry.k === 3 && cells > 100_000;
  return { text: COST_WARNING, needsForce };
}

export function toComputeRequest(entry: CatalogEntry, fields: FieldState[],
                                 resolution: number[], methods: string[],
                                 force: boolean): ComputeRequest {
  const params: Record<string, unknown> = {};
  for (const field of fields) {
    params[field.name] = field.kind === "vector" ? field.values : field.values[0];
  }
  return {
    spec: { family: entry.family, p: entry.p, k: entry.k, params },
    resolution: [...resolution],
    methods: [...methods],
    force,
  };
}
