import { beforeEach, describe, expect, it } from "vitest";

import { HostClient } from "../src/client";
import {
  ConsoleController,
  REPLAY_SPEED_MAX,
  REPLAY_SPEED_MIN,
  SpeechSurface,
} from "../src/console";
import { renderSessionCard } from "../src/dashboard";
import { MockHost, PlayedEntry } from "./mockHost";

const TRIGGERS = [
  { triggerId: "trig-1", caption: "the old garden behind the house" },
  { triggerId: "trig-2", caption: "the Saturday market downtown" },
];

class RecordingSpeech implements SpeechSurface {
  played: PlayedEntry[] = [];
  play(text: string, speedFactor: number): void {
    this.played.push({ text, speedFactor });
  }
}

let host: MockHost;
let speech: RecordingSpeech;
let controller: ConsoleController;

beforeEach(() => {
  host = new MockHost("desk-1", TRIGGERS);
  speech = new RecordingSpeech();
  controller = new ConsoleController(new HostClient("http://mockhost", host.fetch), {
    sessionId: "desk-1",
  }, speech);
  controller.setTriggers(
    TRIGGERS.map((t) => ({ ...t, mediaRef: `${t.triggerId}.jpg` })),
  );
});

async function tickUntil(state: string, limit = 25): Promise<void> {
  for (let i = 0; i < limit; i++) {
    if (controller.currentView().sessionState === state) return;
    await controller.tick();
  }
  throw new Error(
    `never reached ${state}; stuck in ${controller.currentView().sessionState}`,
  );
}

describe("scripted console session", () => {
  it("drives select, record, stop, repeat, home through the host", async () => {
    await controller.tick();
    expect(controller.currentView().sessionState).toBe("idle");

    await controller.selectTrigger("trig-1");
    expect(controller.currentView().sessionState).toBe("trigger_selected");
    expect(controller.currentView().cueText).toBe("the old garden behind the house");

    await controller.startRecording();
    expect(controller.currentView().sessionState).toBe("recording");

    await controller.stopRecording();
    await tickUntil("awaiting_next");

    // the response was spoken once at normal pace and landed in the feed
    expect(speech.played).toHaveLength(1);
    expect(speech.played[0]?.speedFactor).toBe(1.0);
    const transcript = controller.currentView().transcript;
    expect(transcript).toHaveLength(1);
    expect(transcript[0]?.robotText).toContain("the old garden");
    expect(controller.currentView().lastLatencyS).toBeCloseTo(5.89, 6);

    await controller.repeat();
    await tickUntil("awaiting_next");

    // the replay reuses the retained response at the slowed pace
    expect(speech.played).toHaveLength(2);
    const replay = speech.played[1]!;
    expect(replay.text).toBe(transcript[0]?.robotText);
    expect(replay.speedFactor).toBeGreaterThanOrEqual(REPLAY_SPEED_MIN);
    expect(replay.speedFactor).toBeLessThanOrEqual(REPLAY_SPEED_MAX);

    await controller.goHome();
    expect(controller.currentView().sessionState).toBe("ended");

    // the host saw exactly the five console commands, in order
    expect(host.commandTrace).toEqual([
      "select-trigger",
      "start-recording",
      "stop-recording",
      "play-response",
      "home",
    ]);

    // and its packaged log renders straight into a review card
    const card = renderSessionCard(host.packagedLog());
    expect(card.classList.contains("session-card")).toBe(true);
    expect(card.textContent).toContain("P01");
    expect(card.textContent).toContain("trig-1");
    expect(card.textContent).toContain("5.89s");
  });

  it("answers a button press with a visible state change within 300ms", async () => {
    await controller.tick();
    const before = performance.now();
    await controller.selectTrigger("trig-2");
    const elapsedMs = performance.now() - before;
    expect(controller.currentView().sessionState).toBe("trigger_selected");
    expect(elapsedMs).toBeLessThan(300);
  });

  it("never replays a pending command it already executed", async () => {
    await controller.selectTrigger("trig-1");
    await controller.startRecording();
    await controller.stopRecording();
    await tickUntil("awaiting_next");
    const playedSoFar = speech.played.length;
    // idle polling must not re-run the speak command left pending
    for (let i = 0; i < 5; i++) await controller.tick();
    expect(speech.played.length).toBe(playedSoFar);
  });
});

describe("rejected commands", () => {
  it("shows a toast and leaves the state alone", async () => {
    await controller.tick();
    await controller.repeat(); // nothing to replay yet
    const view = controller.currentView();
    expect(view.toast).toContain("illegal in idle");
    expect(view.sessionState).toBe("idle");
    expect(host.commandTrace).toEqual([]);
  });

  it("clears the toast on the next accepted command", async () => {
    await controller.tick();
    await controller.repeat();
    await controller.selectTrigger("trig-1");
    expect(controller.currentView().toast).toBeNull();
  });
});

describe("connection loss", () => {
  it("freezes controls while offline and recovers on the next poll", async () => {
    await controller.selectTrigger("trig-1");
    host.offline = true;
    await controller.tick();
    let view = controller.currentView();
    expect(view.connected).toBe(false);
    expect(Object.values(view.controls).some(Boolean)).toBe(false);

    host.offline = false;
    await controller.tick();
    view = controller.currentView();
    expect(view.connected).toBe(true);
    expect(view.sessionState).toBe("trigger_selected");
    expect(view.controls.record).toBe(true);
  });

  it("marks the view offline when a command cannot be sent", async () => {
    await controller.tick();
    host.offline = true;
    await controller.selectTrigger("trig-1");
    expect(controller.currentView().connected).toBe(false);
    expect(host.commandTrace).toEqual([]);
  });
});

describe("configuration clamps", () => {
  it("keeps the poll interval inside the host contract", () => {
    const fast = new ConsoleController(new HostClient("", host.fetch), {
      sessionId: "desk-1",
      pollIntervalS: 0.001,
    });
    const slow = new ConsoleController(new HostClient("", host.fetch), {
      sessionId: "desk-1",
      pollIntervalS: 5,
    });
    expect(fast.pollIntervalS).toBe(0.05);
    expect(slow.pollIntervalS).toBe(0.25);
  });

  it("keeps the replay speed inside the slowed band", () => {
    const tooFast = new ConsoleController(new HostClient("", host.fetch), {
      sessionId: "desk-1",
      replaySpeedFactor: 1.5,
    });
    expect(tooFast.replaySpeedFactor).toBeLessThanOrEqual(REPLAY_SPEED_MAX);
    expect(tooFast.replaySpeedFactor).toBeGreaterThanOrEqual(REPLAY_SPEED_MIN);
  });
});
