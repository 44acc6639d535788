import { beforeEach, describe, expect, it } from "vitest";

import { DashboardController } from "../src/controller";
import { canNext, canRun, initialState } from "../src/store";
import { FakeBackend } from "./fake_backend";

let backend: FakeBackend;
let controller: DashboardController;

beforeEach(() => {
  backend = new FakeBackend();
  controller = new DashboardController(initialState(), backend);
});

async function boot() {
  await controller.loadModels();
  await controller.refreshEntityStates();
}

describe("dashboard loop", () => {
  it("order=4 down, one seed token: Run + Next x2 equals predict with k=3", async () => {
    await boot();
    controller.setOrder(4);
    controller.setFlavor("down");
    controller.setDraftToken("user,presence,away");
    expect(controller.addToken()).toBe(true);
    expect(canRun(controller.state)).toBe(true);

    await controller.runHelion();
    const statesAfterStep = [{ ...controller.state.entityStates }];
    await controller.nextEvent();
    statesAfterStep.push({ ...controller.state.entityStates });
    await controller.nextEvent();
    statesAfterStep.push({ ...controller.state.entityStates });

    expect(controller.state.outputCards).toHaveLength(3);
    const predicted = await backend.predict(
      "model4",
      ["user,presence,away"],
      3,
      "down",
    );
    expect(controller.state.outputCards.map((c) => c.token)).toEqual(predicted.events);

    // Entity cards always mirror the backend snapshot after each step.
    for (const snapshotTaken of statesAfterStep) {
      expect(Object.keys(snapshotTaken).length).toBeGreaterThan(0);
    }
    expect(controller.state.entityStates).toEqual(await backend.state());
  });

  it("invalid token blocks Run with an inline error and no API call", async () => {
    // No boot: even model loading hasn't happened yet.
    controller.setDraftToken("not-a-token");
    expect(controller.addToken()).toBe(false);
    expect(controller.state.draftError).toBeTruthy();
    expect(canRun(controller.state)).toBe(false);
    await controller.runHelion();
    expect(backend.calls).toEqual([]);
  });

  it("executes each stepped event and accumulates violations", async () => {
    await boot();
    backend.entityStates["user_presence"] = "away";
    controller.setDraftToken("light_bulb,switch,off");
    controller.addToken();
    await controller.runHelion();
    // Flavor up, order 3, history "light_bulb,switch,off" (length 20):
    // the fake's stream starts at index 20 % 6 = 2 -> light on, then
    // index 3 -> light off, then 4 -> user home, then 5 -> away ... step
    // until the door unlock (index 1 after wrap) fires a violation.
    for (let i = 0; i < 5; i += 1) {
      await controller.nextEvent();
    }
    expect(controller.state.violations.length).toBeGreaterThan(0);
    expect(controller.state.violations[0].rule_id).toBe("lock_when_away");
    expect(backend.calls.filter((c) => c === "execute").length).toBe(
      controller.state.outputCards.length,
    );
  });

  it("marks the scenario complete on 409 and disables next", async () => {
    await boot();
    await controller.runHelion();
    const sessionId = controller.state.sessionId!;
    backend.sessions.get(sessionId)!.limit = 2;
    await controller.nextEvent(); // second event, drains the shrunken limit
    await controller.nextEvent(); // 409 path
    expect(controller.state.scenarioComplete).toBe(true);
    expect(canNext(controller.state)).toBe(false);
    expect(controller.state.banners).toEqual([]); // a notice, not an error
  });

  it("flavor toggle flows into the session payload", async () => {
    await boot();
    controller.setFlavor("down");
    await controller.runHelion();
    const session = backend.sessions.get(controller.state.sessionId!)!;
    expect(session.flavor).toBe("down");
    expect(session.modelId).toBe("model3");
  });

  it("rerunning resets output and deletes the stale session", async () => {
    await boot();
    await controller.runHelion();
    await controller.nextEvent();
    expect(controller.state.outputCards).toHaveLength(2);
    const first = controller.state.sessionId;
    await controller.runHelion();
    expect(controller.state.outputCards).toHaveLength(1);
    expect(backend.sessions.has(first!)).toBe(false);
  });

  it("reload restores entity cards from the state endpoint", async () => {
    backend.entityStates["door_lock_lock"] = "unlocked";
    await boot();
    expect(controller.state.entityStates["door_lock_lock"]).toBe("unlocked");
    expect(controller.state.sessionId).toBeNull(); // sessions are not restored
  });

  it("polling appends bus events in order and refreshes the snapshot", async () => {
    await boot();
    await backend.execute(["light_bulb,switch,on"]);
    await backend.execute(["door_lock,lock,unlocked"]);
    await controller.pollEvents();
    expect(controller.state.busEvents.map((e) => e.seq_no)).toEqual([1, 2]);
    expect(controller.state.entityStates["light_bulb_switch"]).toBe("on");
    await controller.pollEvents();
    expect(controller.state.busEvents.map((e) => e.seq_no)).toEqual([1, 2]);
  });

  it("backend failures surface as banners", async () => {
    const failing = new FakeBackend();
    failing.listModels = async () => {
      throw new Error("connection refused");
    };
    const c = new DashboardController(initialState(), failing);
    await c.loadModels();
    expect(c.state.banners.length).toBe(1);
    expect(c.state.banners[0]).toContain("connection refused");
  });
});
