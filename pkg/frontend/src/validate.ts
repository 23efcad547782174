import type { DealInputs } from "./state.js";
import type { Meta } from "./types.js";

export interface ValidationResult {
  ok: boolean;
  errors: Partial<Record<keyof DealInputs, string>>;
}

/** Mirror of the server's domain checks, so bad input never leaves the page. */
export function validateInputs(meta: Meta, inputs: DealInputs): ValidationResult {
  const errors: ValidationResult["errors"] = {};
  if (!Number.isFinite(inputs.f) || inputs.f < 0 || inputs.f > meta.fund_size) {
    errors.f = `remaining capital must lie in [0, ${meta.fund_size}]`;
  }
  if (!Number.isFinite(inputs.t) || inputs.t < 0 || inputs.t > meta.horizon_years) {
    errors.t = `elapsed time must lie in [0, ${meta.horizon_years}] years`;
  }
  if (!Number.isFinite(inputs.size) || inputs.size <= 0) {
    errors.size = "deal size must be positive";
  }
  if (!Number.isFinite(inputs.irr) || inputs.irr <= -1) {
    errors.irr = "underwritten IRR must exceed -100%";
  }
  return { ok: Object.keys(errors).length === 0, errors };
}

export function parseFractions(raw: string): number[] | null {
  const parts = raw
    .split(",")
    .map((p) => p.trim())
    .filter((p) => p.length > 0);
  if (parts.length === 0) return null;
  const values = parts.map(Number);
  if (values.some((v) => !Number.isFinite(v) || v <= 0 || v > 1)) return null;
  return values;
}
