import type { Decision, Meta, SurfaceRow } from "./types.js";

export interface DealInputs {
  f: number;
  t: number;
  size: number;
  irr: number;
}

export interface SessionEntry {
  seq: number;
  f: number;
  t: number;
  size: number;
  irr: number;
  verdict: string;
  thresholdIrr: number | null;
  recorded: boolean;
}

export interface ConsoleState {
  meta: Meta | null;
  remainingCapital: number;
  elapsedYears: number;
  lastInputs: DealInputs | null;
  lastDecision: Decision | null;
  surfaceRows: SurfaceRow[];
  sessionLog: SessionEntry[];
}

export function initialState(): ConsoleState {
  return {
    meta: null,
    remainingCapital: 0,
    elapsedYears: 0,
    lastInputs: null,
    lastDecision: null,
    surfaceRows: [],
    sessionLog: [],
  };
}

export function withMeta(state: ConsoleState, meta: Meta): ConsoleState {
  return {
    ...state,
    meta,
    remainingCapital: meta.fund_size,
  };
}

/** Append-only log; each evaluation lands exactly one new entry. */
export function recordEvaluation(
  state: ConsoleState,
  inputs: DealInputs,
  decision: Decision,
): ConsoleState {
  const entry: SessionEntry = {
    seq: state.sessionLog.length + 1,
    f: inputs.f,
    t: inputs.t,
    size: inputs.size,
    irr: inputs.irr,
    verdict: decision.verdict,
    thresholdIrr: decision.threshold_irr,
    recorded: false,
  };
  return {
    ...state,
    lastInputs: inputs,
    lastDecision: decision,
    sessionLog: [...state.sessionLog, entry],
  };
}

/**
 * Manual "record accepted": deduct the last evaluated deal from the console's
 * remaining capital. Purely client-side; the server stays stateless.
 */
export function recordAccepted(state: ConsoleState): ConsoleState {
  if (!state.lastInputs || !state.lastDecision || state.lastDecision.verdict !== "accept") {
    return state;
  }
  const last = state.sessionLog[state.sessionLog.length - 1];
  if (last === undefined || last.recorded) {
    return state;
  }
  const updatedLog = state.sessionLog.slice(0, -1).concat({ ...last, recorded: true });
  return {
    ...state,
    remainingCapital: state.remainingCapital - state.lastInputs.size,
    sessionLog: updatedLog,
  };
}

export function withSurface(state: ConsoleState, rows: SurfaceRow[]): ConsoleState {
  return { ...state, surfaceRows: rows };
}
