import { describe, expect, it } from "vitest";

import {
  applyLog,
  applyPoll,
  connectionLost,
  controlsFor,
  emptyView,
} from "../src/view";
import { PollResponse } from "../src/wire";

const TRIGGERS = [
  { triggerId: "trig-1", mediaRef: "a.jpg", caption: "the old garden" },
  { triggerId: "trig-2", mediaRef: "b.jpg", caption: "the harbor" },
];

function poll(overrides: Partial<PollResponse>): PollResponse {
  return {
    sessionState: "idle",
    pendingCommand: null,
    activeTrigger: null,
    displayText: null,
    stateToken: 1,
    ...overrides,
  };
}

describe("controlsFor", () => {
  const ALL_STATES = [
    "idle",
    "trigger_selected",
    "recording",
    "awaiting_uploads",
    "transcribing",
    "reasoning",
    "speaking",
    "awaiting_next",
    "ended",
  ];

  it("yields exactly one control set per state", () => {
    const seen = new Set<string>();
    for (const state of ALL_STATES) {
      const flags = controlsFor(state, true);
      seen.add(JSON.stringify([state, flags]));
    }
    expect(seen.size).toBe(ALL_STATES.length);
  });

  it("never offers record and stop at the same time", () => {
    for (const state of ALL_STATES) {
      const flags = controlsFor(state, true);
      expect(flags.record && flags.stop).toBe(false);
    }
  });

  it("gates repeat on an existing response", () => {
    expect(controlsFor("awaiting_next", false).repeat).toBe(false);
    expect(controlsFor("awaiting_next", true).repeat).toBe(true);
    expect(controlsFor("speaking", false).repeat).toBe(false);
  });

  it("only opens the gallery where selection is legal", () => {
    const open = ALL_STATES.filter((s) => controlsFor(s, true).gallery);
    expect(open).toEqual(["idle", "awaiting_next"]);
  });

  it("keeps home reachable in every active state", () => {
    for (const state of ALL_STATES) {
      if (state === "idle" || state === "ended") continue;
      expect(controlsFor(state, false).home).toBe(true);
    }
  });
});

describe("applyPoll", () => {
  it("mirrors the host display text verbatim into the cue", () => {
    const view = applyPoll(
      emptyView(),
      poll({ sessionState: "trigger_selected", displayText: "the old garden" }),
      TRIGGERS,
    );
    expect(view.cueText).toBe("the old garden");
    expect(view.sessionState).toBe("trigger_selected");
  });

  it("resolves the active trigger against the preloaded profile", () => {
    const view = applyPoll(
      emptyView(),
      poll({ sessionState: "trigger_selected", activeTrigger: "trig-2" }),
      TRIGGERS,
    );
    expect(view.activeTrigger?.caption).toBe("the harbor");
  });

  it("remembers that a response existed once speaking was observed", () => {
    let view = applyPoll(emptyView(), poll({ sessionState: "speaking" }), TRIGGERS);
    view = applyPoll(view, poll({ sessionState: "awaiting_next" }), TRIGGERS);
    expect(view.hasResponse).toBe(true);
    expect(view.controls.repeat).toBe(true);
  });
});

describe("applyLog", () => {
  const log = {
    turns: [
      {
        turn_index: 1,
        trigger_id: "trig-1",
        user_transcript: "I remember the roses.",
        robot_response: "Tell me more.",
        user_speech_duration_s: 6.0,
        latency: { asr_s: 0.97, reasoning_s: 4.48, orchestration_s: 0.44, end_to_end_s: 5.89 },
      },
    ],
  };

  it("fills the transcript feed and the latency readout", () => {
    const view = applyLog(emptyView(), log);
    expect(view.transcript).toHaveLength(1);
    expect(view.transcript[0]?.userText).toBe("I remember the roses.");
    expect(view.lastLatencyS).toBeCloseTo(5.89, 6);
    expect(view.hasResponse).toBe(true);
  });

  it("is a no-op for a missing log", () => {
    const view = emptyView();
    expect(applyLog(view, null)).toEqual(view);
  });
});

describe("connectionLost", () => {
  it("freezes every control and raises the banner flag", () => {
    const connected = applyPoll(emptyView(), poll({ sessionState: "awaiting_next" }), TRIGGERS);
    const lost = connectionLost(connected);
    expect(lost.connected).toBe(false);
    expect(Object.values(lost.controls).some(Boolean)).toBe(false);
    // the last known state stays on screen rather than blanking out
    expect(lost.sessionState).toBe("awaiting_next");
  });
});
