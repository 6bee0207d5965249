import { beforeEach, describe, expect, it } from "vitest";

import { HostClient } from "../src/client";
import { ConsoleController } from "../src/console";
import { ConsoleUi } from "../src/ui";
import { MockHost } from "./mockHost";

const TRIGGERS = [
  { triggerId: "trig-1", caption: "the old garden behind the house" },
  { triggerId: "trig-2", caption: "the Saturday market downtown" },
  { triggerId: "trig-3", caption: "your wedding day at the lake" },
  { triggerId: "trig-4", caption: "the bakery you ran with your sister" },
];

function triggerInfos() {
  return TRIGGERS.map((t) => ({ ...t, mediaRef: `${t.triggerId}.jpg` }));
}

let host: MockHost;
let controller: ConsoleController;
let root: HTMLElement;
let ui: ConsoleUi;

beforeEach(() => {
  host = new MockHost("desk-1", TRIGGERS);
  controller = new ConsoleController(
    new HostClient("http://mockhost", host.fetch),
    { sessionId: "desk-1" },
    { play: () => {} },
  );
  root = document.createElement("div");
  document.body.replaceChildren(root);
  ui = new ConsoleUi(root, controller, (t) => `blob:${t.mediaRef}`);
});

function buttons(): Map<string, HTMLButtonElement> {
  const found = new Map<string, HTMLButtonElement>();
  for (const node of root.querySelectorAll<HTMLButtonElement>(".control")) {
    found.set(node.textContent ?? "", node);
  }
  return found;
}

describe("trigger gallery", () => {
  it("shows one tile per preloaded trigger", async () => {
    ui.setTriggers(triggerInfos());
    await controller.tick();
    const tiles = root.querySelectorAll(".tile");
    expect(tiles).toHaveLength(4);
    expect(tiles[0]?.textContent).toContain("the old garden behind the house");
    expect(tiles[0]?.querySelector("img")?.getAttribute("src")).toBe("blob:trig-1.jpg");
  });

  it("guides the caregiver when no triggers exist yet", async () => {
    ui.setTriggers([]);
    await controller.tick();
    expect(root.querySelector(".guidance")?.textContent).toContain("No memory triggers yet");
    expect(root.querySelectorAll(".tile")).toHaveLength(0);
  });

  it("selects a trigger on tap and mirrors the host cue", async () => {
    ui.setTriggers(triggerInfos());
    await controller.tick();
    const tile = root.querySelector<HTMLButtonElement>('[data-trigger-id="trig-3"]');
    tile?.click();
    // the click handler dispatches asynchronously; let the chain drain
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(host.state).toBe("trigger_selected");
    expect(root.querySelector(".cue")?.textContent).toBe("your wedding day at the lake");
    expect(root.querySelector('[data-trigger-id="trig-3"]')?.classList.contains("active")).toBe(
      true,
    );
  });

  it("locks the tiles while a turn is running", async () => {
    ui.setTriggers(triggerInfos());
    await controller.selectTrigger("trig-1");
    await controller.startRecording();
    const tile = root.querySelector<HTMLButtonElement>('[data-trigger-id="trig-2"]');
    expect(tile?.disabled).toBe(true);
  });
});

describe("session controls", () => {
  it("walks the recording button pair through a turn", async () => {
    ui.setTriggers(triggerInfos());
    await controller.tick();
    expect(buttons().size).toBe(0); // idle shows the gallery alone

    await controller.selectTrigger("trig-1");
    expect([...buttons().keys()]).toEqual(["Start Recording", "Home"]);

    buttons().get("Start Recording")?.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(host.state).toBe("recording");
    expect([...buttons().keys()]).toEqual(["Stop Recording", "Home"]);
  });

  it("disables repeat until a response exists", async () => {
    ui.setTriggers(triggerInfos());
    await controller.selectTrigger("trig-1");
    await controller.startRecording();
    await controller.stopRecording();
    for (let i = 0; i < 25 && host.state !== "awaiting_next"; i++) await controller.tick();
    const repeat = buttons().get("Repeat");
    expect(repeat).toBeDefined();
    expect(repeat?.disabled).toBe(false);
  });

  it("shows the reconnect banner when the host drops", async () => {
    await controller.tick();
    expect(root.querySelector(".banner")?.hasAttribute("hidden")).toBe(true);
    host.offline = true;
    await controller.tick();
    expect(root.querySelector(".banner")?.hasAttribute("hidden")).toBe(false);
  });
});
