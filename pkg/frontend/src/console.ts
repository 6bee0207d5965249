/**
 * Console controller: one polling task, serialized command dispatch,
 * and the playback half of the display surface.
 *
 * The host pushes work to its executor through the pending command on
 * each poll response, deduplicated by state token. In desk deployments
 * this console is that executor for speech and text; on a robot the
 * tablet build runs with playback execution switched off so the robot
 * speaks instead.
 */

import { HostClient, TransportError, TriggerInfo } from "./client";
import {
  ConsoleSessionView,
  applyLog,
  applyPoll,
  connectionLost,
  emptyView,
  withToast,
} from "./view";
import { Command, CommandKind, makeCommand } from "./wire";

export interface SpeechSurface {
  /** Speak `text`; speedFactor below 1.0 means a slowed replay. */
  play(text: string, speedFactor: number): void;
}

/** Browser playback through the Web Speech API; silent where unsupported. */
export class SpeechSynthesisSurface implements SpeechSurface {
  play(text: string, speedFactor: number): void {
    if (typeof speechSynthesis === "undefined") return;
    const utterance = new SpeechSynthesisUtterance(text);
    utterance.rate = speedFactor;
    speechSynthesis.speak(utterance);
  }
}

export interface ConsoleConfig {
  sessionId: string;
  /** Seconds between polls; the host contract allows 0.05 to 0.25. */
  pollIntervalS?: number;
  /** Replay pace for Repeat; must stay within the slowed 0.75..0.90 band. */
  replaySpeedFactor?: number;
  /** Off on robot deployments, where the robot owns audio output. */
  executePlayback?: boolean;
}

const POLL_INTERVAL_MIN_S = 0.05;
const POLL_INTERVAL_MAX_S = 0.25;
export const REPLAY_SPEED_MIN = 0.75;
export const REPLAY_SPEED_MAX = 0.9;

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export type ViewListener = (view: ConsoleSessionView) => void;

export class ConsoleController {
  readonly sessionId: string;
  readonly pollIntervalS: number;
  readonly replaySpeedFactor: number;
  private readonly executePlayback: boolean;
  private view: ConsoleSessionView = emptyView();
  private triggers: readonly TriggerInfo[] = [];
  private listeners: ViewListener[] = [];
  private lastExecutedToken = -1;
  private lastLogState = "";
  private dispatchChain: Promise<unknown> = Promise.resolve();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly host: HostClient,
    config: ConsoleConfig,
    private readonly speech: SpeechSurface = new SpeechSynthesisSurface(),
  ) {
    this.sessionId = config.sessionId;
    this.pollIntervalS = clamp(
      config.pollIntervalS ?? 0.1,
      POLL_INTERVAL_MIN_S,
      POLL_INTERVAL_MAX_S,
    );
    this.replaySpeedFactor = clamp(
      config.replaySpeedFactor ?? 0.85,
      REPLAY_SPEED_MIN,
      REPLAY_SPEED_MAX,
    );
    this.executePlayback = config.executePlayback ?? true;
  }

  currentView(): ConsoleSessionView {
    return this.view;
  }

  setTriggers(triggers: readonly TriggerInfo[]): void {
    this.triggers = triggers;
  }

  onChange(listener: ViewListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(view: ConsoleSessionView): void {
    this.view = view;
    for (const listener of this.listeners) listener(view);
  }

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.tick(), this.pollIntervalS * 1000);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One poll cycle: refresh the view, then act on newly pending work. */
  async tick(): Promise<void> {
    let poll;
    try {
      poll = await this.host.poll(this.sessionId);
    } catch (error) {
      if (error instanceof TransportError) {
        this.update(connectionLost(this.view));
        return;
      }
      throw error;
    }
    let view = applyPoll(this.view, poll, this.triggers);
    if (
      this.executePlayback &&
      poll.pendingCommand !== null &&
      poll.stateToken > this.lastExecutedToken
    ) {
      this.lastExecutedToken = poll.stateToken;
      this.execute(poll.pendingCommand);
    }
    // turn results only change when the host comes to rest, so that is
    // the only moment worth re-fetching the packaged log
    const settled = poll.sessionState === "awaiting_next" || poll.sessionState === "ended";
    const logKey = `${poll.sessionState}:${poll.stateToken}`;
    if (settled && logKey !== this.lastLogState) {
      this.lastLogState = logKey;
      try {
        view = applyLog(view, await this.host.fetchLog(this.sessionId));
      } catch (error) {
        if (!(error instanceof TransportError)) throw error;
      }
    }
    this.update(view);
  }

  private execute(command: Command): void {
    if (command.kind === "speak-response") {
      this.speech.play(command.payload ?? "", 1.0);
    } else if (command.kind === "play-response") {
      const text = command.payload ?? this.lastResponseText();
      if (text) this.speech.play(text, this.replaySpeedFactor);
    }
    // recording commands stay with the robot-side capture client
  }

  private lastResponseText(): string | null {
    const last = this.view.transcript[this.view.transcript.length - 1];
    return last ? last.robotText : null;
  }

  /**
   * Queue one command. Dispatch is serialized so taps can never reach
   * the host out of order, and every accepted command is followed by an
   * immediate poll so the visible state changes without waiting out the
   * poll interval.
   */
  dispatch(kind: CommandKind, options: { payload?: string } = {}): Promise<void> {
    const send = async () => {
      let ack;
      try {
        ack = await this.host.sendCommand(makeCommand(kind, this.sessionId, options));
      } catch (error) {
        if (error instanceof TransportError) {
          this.update(connectionLost(this.view));
          return;
        }
        throw error;
      }
      if (!ack.ok) {
        this.update(withToast(this.view, ack.errorDetail ?? "command rejected"));
        return;
      }
      this.update(withToast(this.view, null));
      await this.tick();
    };
    const next = this.dispatchChain.then(send, send);
    this.dispatchChain = next;
    return next;
  }

  selectTrigger(triggerId: string): Promise<void> {
    return this.dispatch("select-trigger", { payload: triggerId });
  }

  startRecording(): Promise<void> {
    return this.dispatch("start-recording");
  }

  stopRecording(): Promise<void> {
    return this.dispatch("stop-recording");
  }

  repeat(): Promise<void> {
    return this.dispatch("play-response");
  }

  goHome(): Promise<void> {
    return this.dispatch("home");
  }
}
