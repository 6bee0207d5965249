/**
 * Caregiver review dashboard: read-only cards over session summaries
 * (the host's packaged logs) and the offline analytics report JSON.
 *
 * Each card parses its own input defensively, so one malformed summary
 * degrades into an error card while its neighbours render normally.
 */

import { el } from "./ui";

export interface SessionCardData {
  userId: string;
  conversationTime: string;
  robotSetup: string;
  turnCount: number;
  triggersUsed: string[];
  latencyMeanS: number | null;
  durationMin: number | null;
  completed: boolean;
}

export class MalformedSummary extends Error {}

/** Digest one packaged session log into the numbers a card shows. */
export function sessionCardData(log: unknown): SessionCardData {
  if (typeof log !== "object" || log === null || Array.isArray(log)) {
    throw new MalformedSummary("summary is not an object");
  }
  const d = log as Record<string, unknown>;
  const userId = d["user_id"];
  const time = d["conversation_time"];
  if (typeof userId !== "string" || !userId) throw new MalformedSummary("missing user_id");
  if (typeof time !== "string" || !time) throw new MalformedSummary("missing conversation_time");
  const turns = Array.isArray(d["turns"]) ? d["turns"] : [];
  const latencies: number[] = [];
  let speechAndReply = 0;
  for (const raw of turns) {
    const turn = raw as Record<string, unknown>;
    const latency = (turn["latency"] ?? {}) as Record<string, unknown>;
    const endToEnd = latency["end_to_end_s"];
    if (typeof endToEnd !== "number") throw new MalformedSummary("turn without latency");
    latencies.push(endToEnd);
    const speech = turn["user_speech_duration_s"];
    speechAndReply += (typeof speech === "number" ? speech : 0) + endToEnd;
  }
  const events = Array.isArray(d["events"]) ? d["events"] : [];
  let lastEventT = 0;
  for (const raw of events) {
    const t = (raw as Record<string, unknown>)["t"];
    if (typeof t === "number" && t > lastEventT) lastEventT = t;
  }
  const durationS = lastEventT > 0 ? lastEventT : speechAndReply;
  return {
    userId,
    conversationTime: time,
    robotSetup: String(d["robot_setup"] ?? "?"),
    turnCount: turns.length,
    triggersUsed: Array.isArray(d["triggers_used"]) ? d["triggers_used"].map(String) : [],
    latencyMeanS: latencies.length
      ? latencies.reduce((a, b) => a + b, 0) / latencies.length
      : null,
    durationMin: durationS > 0 ? durationS / 60 : null,
    completed: d["completed_without_intervention"] === true,
  };
}

function stat(label: string, value: string): HTMLElement {
  return el("div", { class: "stat" }, el("dt", {}, label), el("dd", {}, value));
}

export function renderSessionCard(log: unknown): HTMLElement {
  let data: SessionCardData;
  try {
    data = sessionCardData(log);
  } catch (error) {
    return el(
      "article",
      { class: "card error-card", role: "note" },
      el("h3", {}, "Unreadable summary"),
      el("p", {}, error instanceof Error ? error.message : String(error)),
    );
  }
  return el(
    "article",
    { class: "card session-card", "data-session": `${data.userId}_${data.conversationTime}` },
    el("h3", {}, `${data.userId} on setup ${data.robotSetup}`),
    el(
      "dl",
      {},
      stat("When", data.conversationTime),
      stat("Turns", String(data.turnCount)),
      stat("Triggers used", data.triggersUsed.join(", ") || "none"),
      stat("Mean latency", data.latencyMeanS === null ? "n/a" : `${data.latencyMeanS.toFixed(2)}s`),
      stat("Duration", data.durationMin === null ? "n/a" : `${data.durationMin.toFixed(1)} min`),
      stat("Completed unassisted", data.completed ? "yes" : "no"),
    ),
  );
}

/** All summaries as cards; bad ones become error cards in place. */
export function renderSessionCards(logs: unknown[]): HTMLElement {
  const container = el("section", { class: "session-cards" });
  if (logs.length === 0) {
    container.append(el("p", { class: "empty" }, "No sessions yet."));
    return container;
  }
  for (const log of logs) container.append(renderSessionCard(log));
  return container;
}

const ENGAGEMENT_LABELS: Record<string, string> = {
  on_topic_ratio: "On-topic",
  mean_reminiscence_depth: "Depth",
  self_disclosure_ratio: "Self-disclosure",
  gaze_robot_ratio: "Gaze on robot",
  valence_mean: "Valence mean",
  valence_pos_ratio: "Valence positive",
};

function cell(value: unknown): string {
  if (typeof value !== "number") return "";
  return value.toFixed(2);
}

function meanSd(raw: unknown): string {
  if (typeof raw !== "object" || raw === null) return "";
  const d = raw as Record<string, unknown>;
  if (typeof d["mean"] !== "number" || typeof d["sd"] !== "number") return "";
  return `${d["mean"].toFixed(2)} +/- ${d["sd"].toFixed(2)}`;
}

/**
 * The corpus view: one engagement card per participant and, when both
 * setups are present, their column summaries side by side.
 */
export function renderReport(raw: unknown): HTMLElement {
  const container = el("section", { class: "report" });
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    container.append(
      el("article", { class: "card error-card", role: "note" }, "Report is not readable."),
    );
    return container;
  }
  const report = raw as Record<string, unknown>;
  const participants = Array.isArray(report["participants"]) ? report["participants"] : [];
  if (participants.length === 0) {
    container.append(el("p", { class: "empty" }, "No participants in this report."));
    return container;
  }

  const cards = el("div", { class: "participant-cards" });
  for (const rawRow of participants) {
    const row = rawRow as Record<string, unknown>;
    const dl = el("dl", {});
    dl.append(stat("Setup", String(row["robot_setup"] ?? "?")));
    dl.append(stat("Turns annotated", String(row["turn_count"] ?? "?")));
    for (const [column, label] of Object.entries(ENGAGEMENT_LABELS)) {
      dl.append(stat(label, cell(row[column])));
    }
    cards.append(
      el(
        "article",
        { class: "card participant-card", "data-user": String(row["user_id"] ?? "") },
        el("h3", {}, String(row["user_id"] ?? "unknown")),
        dl,
      ),
    );
  }
  container.append(cards);

  const comparison = report["setup_comparison"];
  if (typeof comparison === "object" && comparison !== null) {
    const bySetup = ((comparison as Record<string, unknown>)["by_setup"] ?? {}) as Record<
      string,
      unknown
    >;
    const setups = Object.keys(bySetup).sort();
    if (setups.length >= 2) {
      const table = el("table", { class: "comparison" });
      const head = el("tr", {}, el("th", {}, "Metric"));
      for (const setup of setups) head.append(el("th", {}, `Setup ${setup}`));
      table.append(head);
      for (const [column, label] of Object.entries(ENGAGEMENT_LABELS)) {
        const row = el("tr", {}, el("td", {}, label));
        for (const setup of setups) {
          const cols = (bySetup[setup] ?? {}) as Record<string, unknown>;
          row.append(el("td", {}, meanSd(cols[column])));
        }
        table.append(row);
      }
      container.append(el("h3", {}, "By setup"), table);
    }
  }

  const system = report["system"];
  if (typeof system === "object" && system !== null) {
    const d = system as Record<string, unknown>;
    const rate = d["completion_rate"];
    container.append(
      el(
        "p",
        { class: "system-line" },
        `${String(d["session_count"] ?? "?")} sessions, ` +
          `${typeof rate === "number" ? (rate * 100).toFixed(1) : "?"}% completed unassisted.`,
      ),
    );
  }
  return container;
}
