/**
 * Session view model.
 *
 * The console keeps no session state of its own: every field here is a
 * fold over what the host reported, so replaying the same poll history
 * always reconstructs the same view. Each host state maps to exactly
 * one control set; the cue line mirrors the host's display text
 * verbatim.
 */

import { PollResponse } from "./wire";
import { TriggerInfo } from "./client";

export interface ControlFlags {
  record: boolean;
  stop: boolean;
  repeat: boolean;
  home: boolean;
  /** Trigger tiles accept taps only where select-trigger is legal. */
  gallery: boolean;
}

export interface TranscriptEntry {
  turnIndex: number;
  triggerId: string;
  userText: string;
  robotText: string;
  endToEndS: number;
}

export interface ConsoleSessionView {
  sessionState: string;
  activeTrigger: TriggerInfo | null;
  cueText: string | null;
  controls: ControlFlags;
  transcript: TranscriptEntry[];
  lastLatencyS: number | null;
  /** False after a failed poll until the next one succeeds. */
  connected: boolean;
  toast: string | null;
  /** The host has spoken at least one response we could replay. */
  hasResponse: boolean;
}

const NO_CONTROLS: ControlFlags = {
  record: false,
  stop: false,
  repeat: false,
  home: false,
  gallery: false,
};

/**
 * The one control set for a host state. Repeat only ever lights up once
 * a response exists to replay.
 */
export function controlsFor(state: string, hasResponse: boolean): ControlFlags {
  switch (state) {
    case "idle":
      return { ...NO_CONTROLS, gallery: true };
    case "trigger_selected":
      return { ...NO_CONTROLS, record: true, home: true };
    case "recording":
      return { ...NO_CONTROLS, stop: true, home: true };
    case "awaiting_uploads":
    case "transcribing":
    case "reasoning":
      return { ...NO_CONTROLS, home: true };
    case "speaking":
      return { ...NO_CONTROLS, repeat: hasResponse, home: true };
    case "awaiting_next":
      return { ...NO_CONTROLS, record: true, repeat: hasResponse, home: true, gallery: true };
    case "ended":
      return { ...NO_CONTROLS };
    default:
      return { ...NO_CONTROLS, home: true };
  }
}

export function emptyView(): ConsoleSessionView {
  return {
    sessionState: "idle",
    activeTrigger: null,
    cueText: null,
    controls: controlsFor("idle", false),
    transcript: [],
    lastLatencyS: null,
    connected: true,
    toast: null,
    hasResponse: false,
  };
}

export function applyPoll(
  view: ConsoleSessionView,
  poll: PollResponse,
  triggers: readonly TriggerInfo[],
): ConsoleSessionView {
  const active = poll.activeTrigger
    ? (triggers.find((t) => t.triggerId === poll.activeTrigger) ?? null)
    : null;
  const hasResponse =
    view.hasResponse || poll.sessionState === "speaking" || view.transcript.length > 0;
  return {
    ...view,
    sessionState: poll.sessionState,
    activeTrigger: active,
    cueText: poll.displayText,
    controls: controlsFor(poll.sessionState, hasResponse),
    connected: true,
    hasResponse,
  };
}

/** Merge the host's packaged log into the transcript feed. */
export function applyLog(
  view: ConsoleSessionView,
  log: Record<string, unknown> | null,
): ConsoleSessionView {
  if (log === null) return view;
  const rawTurns = Array.isArray(log["turns"]) ? log["turns"] : [];
  const transcript: TranscriptEntry[] = [];
  for (const raw of rawTurns) {
    const turn = raw as Record<string, unknown>;
    const latency = (turn["latency"] ?? {}) as Record<string, unknown>;
    transcript.push({
      turnIndex: Number(turn["turn_index"] ?? 0),
      triggerId: String(turn["trigger_id"] ?? ""),
      userText: String(turn["user_transcript"] ?? ""),
      robotText: String(turn["robot_response"] ?? ""),
      endToEndS: Number(latency["end_to_end_s"] ?? 0),
    });
  }
  const last = transcript[transcript.length - 1];
  return {
    ...view,
    transcript,
    lastLatencyS: last ? last.endToEndS : view.lastLatencyS,
    hasResponse: view.hasResponse || transcript.length > 0,
    controls: controlsFor(view.sessionState, view.hasResponse || transcript.length > 0),
  };
}

export function connectionLost(view: ConsoleSessionView): ConsoleSessionView {
  // all controls freeze while unreachable; the banner explains why
  return { ...view, connected: false, controls: { ...NO_CONTROLS } };
}

export function withToast(view: ConsoleSessionView, message: string | null): ConsoleSessionView {
  return { ...view, toast: message };
}
