/**
 * Page bootstrap. Query parameters pick the surface:
 *
 *   ?session=S01&host=http://host:8000            live console
 *   ...&portal=http://portal:9000&user=P01        with the trigger gallery
 *   ?view=review&report=report.json               caregiver dashboard
 *
 * The live console works without a portal; it then starts with an empty
 * gallery and whatever session the host runtime provisioned.
 */

import { HostClient, PortalClient, TriggerInfo } from "./client";
import { ConsoleController } from "./console";
import { renderReport } from "./dashboard";
import { ConsoleUi, el } from "./ui";

async function bootLive(root: HTMLElement, params: URLSearchParams): Promise<void> {
  const sessionId = params.get("session") ?? "";
  if (!sessionId) {
    root.replaceChildren(
      el("p", { class: "guidance" }, "Add ?session=<id> to join a provisioned session."),
    );
    return;
  }
  const host = new HostClient(params.get("host") ?? "");
  const controller = new ConsoleController(host, {
    sessionId,
    pollIntervalS: Number(params.get("interval") ?? "0.1"),
  });
  const mediaUrls = new Map<string, string>();
  const ui = new ConsoleUi(root, controller, (t) => mediaUrls.get(t.triggerId) ?? "");

  const portalUrl = params.get("portal");
  const userId = params.get("user");
  if (portalUrl && userId) {
    const portal = new PortalClient(portalUrl);
    const account = params.get("account") ?? "";
    const password = prompt(`Portal password for ${account}`) ?? "";
    try {
      await portal.login(account, password);
      const bundle = await portal.preload(userId);
      for (const trigger of bundle.triggers) {
        const blob = await portal.mediaBlob(userId, trigger.mediaRef);
        mediaUrls.set(trigger.triggerId, URL.createObjectURL(blob));
      }
      ui.setTriggers(bundle.triggers);
    } catch (error) {
      root.prepend(el("div", { class: "banner", role: "alert" }, String(error)));
    }
  } else {
    ui.setTriggers([] as TriggerInfo[]);
  }
  controller.start();
}

async function bootReview(root: HTMLElement, params: URLSearchParams): Promise<void> {
  const reportUrl = params.get("report");
  if (!reportUrl) {
    root.replaceChildren(el("p", { class: "guidance" }, "Add ?report=<url> to load a report."));
    return;
  }
  let payload: unknown;
  try {
    payload = await (await fetch(reportUrl)).json();
  } catch (error) {
    root.replaceChildren(
      el("article", { class: "card error-card", role: "note" }, `Could not load report: ${error}`),
    );
    return;
  }
  root.replaceChildren(renderReport(payload));
}

export function main(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(location.search);
  if (params.get("view") === "review") {
    void bootReview(root, params);
  } else {
    void bootLive(root, params);
  }
}

main();
