// Orchestrates the dashboard loop against the backend: load models, open a
// stepping session, pull one predicted event at a time, execute it, and
// refresh the entity snapshot. No DOM here; app.ts renders the state.

import { ApiError, Backend } from "./api";
import {
  DashboardState,
  Flavor,
  Order,
  SESSION_LIMIT,
  addDraftToken,
  appendBusEvents,
  canNext,
  canRun,
  modelForOrder,
  pushBanner,
  resetScenario,
  setDraft,
} from "./store";

export class DashboardController {
  constructor(
    public state: DashboardState,
    private api: Backend,
    private onChange: () => void = () => {},
  ) {}

  private changed(): void {
    this.onChange();
  }

  async loadModels(): Promise<void> {
    try {
      this.state.models = await this.api.listModels();
      this.state.modelsLoaded = true;
    } catch (err) {
      this.fail("loading models", err);
    }
    this.changed();
  }

  async refreshEntityStates(): Promise<void> {
    try {
      this.state.entityStates = await this.api.state();
    } catch (err) {
      this.fail("fetching entity states", err);
    }
    this.changed();
  }

  setOrder(order: Order): void {
    this.state.settings.order = order;
    this.changed();
  }

  setFlavor(flavor: Flavor): void {
    this.state.settings.flavor = flavor;
    this.changed();
  }

  setDraftToken(text: string): void {
    setDraft(this.state, text);
    this.changed();
  }

  addToken(): boolean {
    const added = addDraftToken(this.state);
    this.changed();
    return added;
  }

  removeToken(index: number): void {
    this.state.inputHistory.splice(index, 1);
    this.changed();
  }

  /** "Run Helion": open a session for the current settings and history,
   * then show the first predicted event. */
  async runHelion(): Promise<void> {
    if (!canRun(this.state)) {
      return;
    }
    const model = modelForOrder(this.state);
    if (model === undefined) {
      return;
    }
    const previousSession = this.state.sessionId;
    resetScenario(this.state);
    this.state.pending = true;
    this.changed();
    try {
      if (previousSession !== null) {
        await this.api.deleteSession(previousSession).catch(() => undefined);
      }
      const session = await this.api.createSession(
        model.model_id,
        [...this.state.inputHistory],
        this.state.settings.flavor,
        SESSION_LIMIT,
      );
      this.state.sessionId = session.session_id;
      this.state.sessionRemaining = session.remaining;
      this.state.pending = false;
      await this.nextEvent();
    } catch (err) {
      this.state.pending = false;
      this.fail("starting the scenario", err);
      this.changed();
    }
  }

  /** "Next Event": pull one event from the session, execute it on the
   * platform, and refresh entity cards and violations. */
  async nextEvent(): Promise<void> {
    if (!canNext(this.state) || this.state.sessionId === null) {
      return;
    }
    this.state.pending = true;
    this.changed();
    try {
      const next = await this.api.nextEvent(this.state.sessionId);
      this.state.outputCards.push({ token: next.event, logprob: next.logprob });
      this.state.sessionRemaining = next.remaining;
      const report = await this.api.execute([next.event]);
      this.state.violations.push(...report.violations);
      this.state.entityStates = await this.api.state();
      if (next.remaining === 0) {
        this.state.scenarioComplete = true;
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.scenarioComplete = true;
      } else {
        this.fail("stepping the scenario", err);
      }
    } finally {
      this.state.pending = false;
      this.changed();
    }
  }

  /** Poll the bus log; on new events, refetch the snapshot so entity cards
   * stay verbatim with the backend. */
  async pollEvents(): Promise<void> {
    if (this.state.pending) {
      return;
    }
    try {
      const events = await this.api.events(this.state.lastSeqNo);
      if (events.length > 0) {
        appendBusEvents(this.state, events);
        this.state.entityStates = await this.api.state();
        this.changed();
      }
    } catch {
      // Polling failures are transient; the next tick retries.
    }
  }

  private fail(doing: string, err: unknown): void {
    const message =
      err instanceof ApiError
        ? `${err.errorCode}: ${err.message}`
        : err instanceof Error
          ? err.message
          : String(err);
    pushBanner(this.state, `Error while ${doing}: ${message}`);
  }
}
