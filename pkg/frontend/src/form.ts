/**
 * Entry-form state: raw text per parameter, validation against plausibility
 * bounds, and conversion to/from the PredictRequest wire shape.
 *
 * Blank means "not measured".  Only values whose status is "ok" are
 * submitted; non-numeric and out-of-bounds entries are flagged inline but
 * never block submission (they are simply excluded).
 */

import type { CatalogEntry, PredictRequest } from "./types.js";

export type FieldStatus = "ok" | "blank" | "non-numeric" | "out-of-bounds";

export interface FieldState {
  entry: CatalogEntry;
  raw: string;
  status: FieldStatus;
  value: number | null; // parsed value when status is "ok"
}

export interface FormState {
  modelId: string;
  fields: FieldState[];
  dirty: boolean; // edited since the last prediction
}

export function fieldStatus(entry: CatalogEntry, raw: string): FieldStatus {
  const trimmed = raw.trim();
  if (trimmed === "") return "blank";
  const value = Number(trimmed);
  if (!Number.isFinite(value)) return "non-numeric";
  if (value < entry.plausible_min || value > entry.plausible_max) {
    return "out-of-bounds";
  }
  return "ok";
}

/** Fields ordered basic-first, preserving catalog order within each group. */
export function buildForm(catalog: CatalogEntry[], modelId: string): FormState {
  const basicFirst = [...catalog.filter((e) => e.basic), ...catalog.filter((e) => !e.basic)];
  return {
    modelId,
    fields: basicFirst.map((entry) => ({ entry, raw: "", status: "blank", value: null })),
    dirty: false,
  };
}

export function setField(state: FormState, code: string, raw: string): FormState {
  const fields = state.fields.map((f) => {
    if (f.entry.code !== code) return f;
    const status = fieldStatus(f.entry, raw);
    return {
      ...f,
      raw,
      status,
      value: status === "ok" ? Number(raw.trim()) : null,
    };
  });
  return { ...state, fields, dirty: true };
}

export function okFields(state: FormState): FieldState[] {
  return state.fields.filter((f) => f.status === "ok");
}

/** Submission is possible once at least one field parses cleanly. */
export function canSubmit(state: FormState): boolean {
  return okFields(state).length > 0;
}

export function submitBlockedReason(state: FormState): string | null {
  return canSubmit(state) ? null : "enter at least one value";
}

export function toPredictRequest(state: FormState): PredictRequest {
  const measurements: Record<string, number> = {};
  for (const f of okFields(state)) {
    measurements[f.entry.code] = f.value as number;
  }
  return { model_id: state.modelId, measurements };
}

/** Rebuild form state from a request (the round-trip direction). */
export function fromPredictRequest(
  catalog: CatalogEntry[],
  request: PredictRequest,
): FormState {
  let state = buildForm(catalog, request.model_id);
  for (const [code, value] of Object.entries(request.measurements)) {
    state = setField(state, code, String(value));
  }
  return { ...state, dirty: false };
}
