// Dashboard state and its pure transition rules. The controller mutates
// this through the helpers below; rendering reads it verbatim.

import { BusEvent, ModelInfo, Violation } from "./api";
import { checkToken } from "./tokens";

export type Flavor = "up" | "down";
export type Order = 3 | 4;

export interface OutputCard {
  token: string;
  logprob: number;
}

export interface DashboardState {
  settings: { order: Order; flavor: Flavor };
  inputHistory: string[];
  draftToken: string;
  draftError: string | null;
  models: ModelInfo[];
  modelsLoaded: boolean;
  sessionId: string | null;
  sessionRemaining: number;
  scenarioComplete: boolean;
  outputCards: OutputCard[];
  entityStates: Record<string, string>;
  violations: Violation[];
  busEvents: BusEvent[];
  lastSeqNo: number;
  banners: string[];
  pending: boolean;
}

export const SESSION_LIMIT = 50;

export function initialState(): DashboardState {
  return {
    settings: { order: 3, flavor: "up" },
    inputHistory: [],
    draftToken: "",
    draftError: null,
    models: [],
    modelsLoaded: false,
    sessionId: null,
    sessionRemaining: 0,
    scenarioComplete: false,
    outputCards: [],
    entityStates: {},
    violations: [],
    busEvents: [],
    lastSeqNo: 0,
    banners: [],
    pending: false,
  };
}

export function modelForOrder(state: DashboardState): ModelInfo | undefined {
  return state.models.find((m) => m.order === state.settings.order);
}

/** Run needs a model for the selected order, a clean draft box, and a
 * history of valid tokens (the add path enforces validity already). */
export function canRun(state: DashboardState): boolean {
  if (state.pending || state.draftError !== null) {
    return false;
  }
  if (modelForOrder(state) === undefined) {
    return false;
  }
  return state.inputHistory.every((t) => checkToken(t).ok);
}

export function canNext(state: DashboardState): boolean {
  return state.sessionId !== null && !state.pending && !state.scenarioComplete;
}

export function setDraft(state: DashboardState, text: string): void {
  state.draftToken = text;
  state.draftError = text.trim() === "" ? null : firstError(text);
}

function firstError(text: string): string | null {
  const check = checkToken(text);
  return check.ok ? null : check.error;
}

/** Validate and append the draft token; invalid input surfaces inline and
 * never leaves the card. Returns true when the token was added. */
export function addDraftToken(state: DashboardState): boolean {
  const check = checkToken(state.draftToken);
  if (!check.ok) {
    state.draftError = check.error;
    return false;
  }
  state.inputHistory.push(state.draftToken.trim());
  state.draftToken = "";
  state.draftError = null;
  return true;
}

export function removeHistoryToken(state: DashboardState, index: number): void {
  state.inputHistory.splice(index, 1);
}

export function resetScenario(state: DashboardState): void {
  state.sessionId = null;
  state.sessionRemaining = 0;
  state.scenarioComplete = false;
  state.outputCards = [];
  state.violations = [];
}

export function pushBanner(state: DashboardState, message: string): void {
  state.banners.push(message);
}

export function dismissBanner(state: DashboardState, index: number): void {
  state.banners.splice(index, 1);
}

/** Append polled bus events, keeping seq_no order and dropping overlaps. */
export function appendBusEvents(state: DashboardState, events: BusEvent[]): void {
  for (const event of events) {
    if (event.seq_no > state.lastSeqNo) {
      state.busEvents.push(event);
      state.lastSeqNo = event.seq_no;
    }
  }
}
