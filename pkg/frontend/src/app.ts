// DOM wiring: renders the dashboard state into the card sections and maps
// clicks onto the controller. The backend base URL comes from the ?api=
// query parameter or defaults to the page origin.

import { ApiClient } from "./api";
import { DashboardController } from "./controller";
import { Order, canNext, canRun, initialState, dismissBanner } from "./store";

const POLL_INTERVAL_MS = 1000;

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) {
    return fromQuery.replace(/\/$/, "");
  }
  return window.location.origin.startsWith("file:")
    ? "http://127.0.0.1:8765"
    : window.location.origin;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function must(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id}`);
  }
  return node;
}

export function startApp(): void {
  const api = new ApiClient(baseUrl());
  const controller = new DashboardController(initialState(), api, render);
  const state = controller.state;

  const orderSelect = must("order-select") as HTMLSelectElement;
  const flavorSelect = must("flavor-select") as HTMLSelectElement;
  const tokenInput = must("token-input") as HTMLInputElement;
  const tokenError = must("token-error");
  const addButton = must("add-token") as HTMLButtonElement;
  const runButton = must("run-button") as HTMLButtonElement;
  const nextButton = must("next-button") as HTMLButtonElement;
  const historyList = must("history-list");
  const outputCards = must("output-cards");
  const entityCards = must("entity-cards");
  const violationList = must("violation-list");
  const bannerArea = must("banner-area");
  const eventFeed = must("event-feed");
  const scenarioNotice = must("scenario-notice");
  const modelInfo = must("model-info");

  orderSelect.addEventListener("change", () => {
    controller.setOrder(Number(orderSelect.value) as Order);
  });
  flavorSelect.addEventListener("change", () => {
    controller.setFlavor(flavorSelect.value === "down" ? "down" : "up");
  });
  tokenInput.addEventListener("input", () => {
    controller.setDraftToken(tokenInput.value);
  });
  tokenInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      if (controller.addToken()) {
        tokenInput.value = "";
      }
    }
  });
  addButton.addEventListener("click", () => {
    if (controller.addToken()) {
      tokenInput.value = "";
    }
  });
  runButton.addEventListener("click", () => {
    void controller.runHelion();
  });
  nextButton.addEventListener("click", () => {
    void controller.nextEvent();
  });

  function render(): void {
    runButton.disabled = !canRun(state);
    nextButton.disabled = !canNext(state);
    tokenError.textContent = state.draftError ?? "";

    const model = state.models.find((m) => m.order === state.settings.order);
    modelInfo.textContent = state.modelsLoaded
      ? model
        ? `model ${model.model_id} (order ${model.order}, ${model.event_count} events)`
        : `no model trained for order ${state.settings.order}`
      : "loading models...";

    scenarioNotice.textContent = state.scenarioComplete ? "scenario complete" : "";

    historyList.replaceChildren(
      ...state.inputHistory.map((token, index) => {
        const item = el("li", "history-item");
        item.append(el("code", undefined, token));
        const remove = el("button", "remove", "x");
        remove.addEventListener("click", () => controller.removeToken(index));
        item.append(remove);
        return item;
      }),
    );

    outputCards.replaceChildren(
      ...state.outputCards.map((card, index) => {
        const node = el("div", "card output-card");
        node.append(el("div", "card-title", `event ${index + 1}`));
        node.append(el("code", undefined, card.token));
        node.append(el("div", "logprob", `log2 p = ${card.logprob.toFixed(6)}`));
        return node;
      }),
    );

    entityCards.replaceChildren(
      ...Object.entries(state.entityStates).map(([entityId, current]) => {
        const node = el("div", "card entity-card");
        node.append(el("div", "card-title", entityId));
        node.append(el("div", "entity-state", current));
        return node;
      }),
    );

    violationList.replaceChildren(
      ...state.violations.map((violation) => {
        const item = el("li", `violation ${violation.severity}`);
        item.append(
          el(
            "span",
            undefined,
            `seq ${violation.seq_no} [${violation.severity}] ${violation.rule_id}: ${violation.description}`,
          ),
        );
        return item;
      }),
    );

    bannerArea.replaceChildren(
      ...state.banners.map((message, index) => {
        const banner = el("div", "banner");
        banner.append(el("span", undefined, message));
        const dismiss = el("button", "dismiss", "dismiss");
        dismiss.addEventListener("click", () => {
          dismissBanner(state, index);
          render();
        });
        banner.append(dismiss);
        return banner;
      }),
    );

    eventFeed.replaceChildren(
      ...state.busEvents.slice(-30).map((event) => {
        const line = el(
          "li",
          "bus-event",
          `#${event.seq_no} ${event.entity_id}: ${event.old_state} -> ${event.new_state} (${event.cause})`,
        );
        return line;
      }),
    );
  }

  render();
  void controller.loadModels();
  void controller.refreshEntityStates();
  window.setInterval(() => void controller.pollEvents(), POLL_INTERVAL_MS);
}

startApp();
