/**
 * DOM rendering for the live console: cue line, trigger gallery,
 * session controls, transcript feed, reconnect banner, toast.
 *
 * Controls follow a per-state visibility set so the participant only
 * ever sees the buttons that do something right now; everything is
 * sized for touch and labelled for screen readers.
 */

import { ConsoleController } from "./console";
import { TriggerInfo } from "./client";
import { ConsoleSessionView } from "./view";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

type ButtonId = "record" | "stop" | "repeat" | "home";

// which buttons belong on screen in each host state
const VISIBLE_BUTTONS: Record<string, ButtonId[]> = {
  idle: [],
  trigger_selected: ["record", "home"],
  recording: ["stop", "home"],
  awaiting_uploads: ["home"],
  transcribing: ["home"],
  reasoning: ["home"],
  speaking: ["repeat", "home"],
  awaiting_next: ["record", "repeat", "home"],
  ended: [],
};

const BUTTON_LABELS: Record<ButtonId, string> = {
  record: "Start Recording",
  stop: "Stop Recording",
  repeat: "Repeat",
  home: "Home",
};

const STATE_HINTS: Record<string, string> = {
  idle: "Choose a memory to talk about.",
  trigger_selected: "Press Start Recording, then speak.",
  recording: "Listening...",
  awaiting_uploads: "One moment...",
  transcribing: "One moment...",
  reasoning: "One moment...",
  speaking: "",
  awaiting_next: "Speak again, hear it once more, or pick another memory.",
  ended: "Session complete. Thank you for talking with me.",
};

/** Resolves a trigger's photo to a URL; tests can return a data URL. */
export type MediaResolver = (trigger: TriggerInfo) => string;

export class ConsoleUi {
  private readonly banner: HTMLElement;
  private readonly cue: HTMLElement;
  private readonly gallery: HTMLElement;
  private readonly controls: HTMLElement;
  private readonly transcript: HTMLOListElement;
  private readonly toast: HTMLElement;
  private triggers: readonly TriggerInfo[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly controller: ConsoleController,
    private readonly resolveMedia: MediaResolver = () => "",
  ) {
    this.banner = el("div", { class: "banner", role: "alert", hidden: "" }, "Connection lost, retrying...");
    this.cue = el("div", { class: "cue", "aria-live": "polite" });
    this.gallery = el("div", { class: "gallery", role: "group", "aria-label": "memory triggers" });
    this.controls = el("div", { class: "controls" });
    this.transcript = el("ol", { class: "transcript", "aria-label": "conversation so far" });
    this.toast = el("div", { class: "toast", role: "status" });
    root.replaceChildren(
      this.banner,
      this.cue,
      this.gallery,
      this.controls,
      this.transcript,
      this.toast,
    );
    controller.onChange((view) => this.render(view));
    this.render(controller.currentView());
  }

  setTriggers(triggers: readonly TriggerInfo[]): void {
    this.triggers = triggers;
    this.controller.setTriggers(triggers);
    this.renderGallery(this.controller.currentView());
  }

  render(view: ConsoleSessionView): void {
    if (view.connected) this.banner.setAttribute("hidden", "");
    else this.banner.removeAttribute("hidden");

    // the cue mirrors the host's display text verbatim; hints only fill
    // the gaps where the host has nothing to show
    this.cue.textContent = view.cueText ?? STATE_HINTS[view.sessionState] ?? "";

    this.renderGallery(view);
    this.renderControls(view);
    this.renderTranscript(view);
    this.toast.textContent = view.toast ?? "";
  }

  private renderGallery(view: ConsoleSessionView): void {
    this.gallery.replaceChildren();
    if (view.sessionState === "ended") return;
    if (this.triggers.length === 0) {
      this.gallery.append(
        el(
          "p",
          { class: "guidance" },
          "No memory triggers yet. A caregiver can add photos through the portal.",
        ),
      );
      return;
    }
    for (const trigger of this.triggers) {
      const tile = el(
        "button",
        {
          class: "tile",
          type: "button",
          "data-trigger-id": trigger.triggerId,
          "aria-label": trigger.caption,
        },
        el("img", { src: this.resolveMedia(trigger), alt: "" }),
        el("span", { class: "caption" }, trigger.caption),
      );
      if (trigger.triggerId === view.activeTrigger?.triggerId) tile.classList.add("active");
      tile.disabled = !view.controls.gallery || !view.connected;
      tile.addEventListener("click", () => void this.controller.selectTrigger(trigger.triggerId));
      this.gallery.append(tile);
    }
  }

  private renderControls(view: ConsoleSessionView): void {
    this.controls.replaceChildren();
    const actions: Record<ButtonId, () => Promise<void>> = {
      record: () => this.controller.startRecording(),
      stop: () => this.controller.stopRecording(),
      repeat: () => this.controller.repeat(),
      home: () => this.controller.goHome(),
    };
    for (const id of VISIBLE_BUTTONS[view.sessionState] ?? ["home"]) {
      const button = el(
        "button",
        { class: `control control-${id}`, type: "button" },
        BUTTON_LABELS[id],
      );
      button.disabled = !view.controls[id] || !view.connected;
      button.addEventListener("click", () => void actions[id]());
      this.controls.append(button);
    }
  }

  private renderTranscript(view: ConsoleSessionView): void {
    this.transcript.replaceChildren();
    for (const entry of view.transcript) {
      this.transcript.append(
        el(
          "li",
          { class: "turn" },
          el("span", { class: "user-line" }, entry.userText),
          el("span", { class: "robot-line" }, entry.robotText),
          el("span", { class: "latency" }, `${entry.endToEndS.toFixed(2)}s`),
        ),
      );
    }
  }
}
