/**
 * Thin fetch wrappers for the two backends the console talks to: the
 * session host (poll, command, packaged log) and the caregiver portal
 * (login, preload bundle, media files). Both accept an injectable fetch
 * so tests can hand in an in-memory server.
 */

import { Ack, Command, PollResponse, decodeAck, decodePollResponse, encodeCommand } from "./wire";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The host or portal could not be reached or answered outside its contract. */
export class TransportError extends Error {}

async function jsonBody(response: Response, what: string): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    throw new TransportError(`${what}: response body is not JSON`);
  }
}

export class HostClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (error) {
      throw new TransportError(`host unreachable: ${String(error)}`);
    }
    if (response.status >= 500) {
      throw new TransportError(`host error ${response.status} on ${path}`);
    }
    return response;
  }

  async poll(sessionId?: string): Promise<PollResponse> {
    const query = sessionId ? `?session_id=${encodeURIComponent(sessionId)}` : "";
    const response = await this.request(`/poll${query}`);
    if (!response.ok) {
      throw new TransportError(`poll rejected with ${response.status}`);
    }
    return decodePollResponse(await jsonBody(response, "poll"));
  }

  async sendCommand(command: Command): Promise<Ack> {
    const response = await this.request("/command", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(encodeCommand(command)),
    });
    if (!response.ok) {
      throw new TransportError(`command rejected with ${response.status}`);
    }
    return decodeAck(await jsonBody(response, "command"));
  }

  /** Packaged session log, or null while the host has no such session. */
  async fetchLog(sessionId: string): Promise<Record<string, unknown> | null> {
    const response = await this.request(`/session/${encodeURIComponent(sessionId)}/log`);
    if (response.status === 404) return null;
    if (!response.ok) {
      throw new TransportError(`log rejected with ${response.status}`);
    }
    return (await jsonBody(response, "log")) as Record<string, unknown>;
  }
}

export interface TriggerInfo {
  triggerId: string;
  mediaRef: string;
  caption: string;
}

export interface PreloadResult {
  userId: string;
  displayName: string;
  triggers: TriggerInfo[];
  mediaKeys: string[];
}

export class PortalClient {
  private readonly fetchFn: FetchLike;
  private token = "";

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        ...init,
        headers: { "x-portal-token": this.token, ...(init.headers ?? {}) },
      });
    } catch (error) {
      throw new TransportError(`portal unreachable: ${String(error)}`);
    }
    if (response.status >= 500) {
      throw new TransportError(`portal error ${response.status} on ${path}`);
    }
    return response;
  }

  async login(accountId: string, password: string): Promise<void> {
    const response = await this.request("/portal/login", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ account_id: accountId, password }),
    });
    if (!response.ok) {
      throw new TransportError(`login rejected with ${response.status}`);
    }
    const body = (await jsonBody(response, "login")) as { token?: unknown };
    if (typeof body.token !== "string" || !body.token) {
      throw new TransportError("login: no token in response");
    }
    this.token = body.token;
  }

  async preload(userId: string): Promise<PreloadResult> {
    const response = await this.request(`/portal/preload/${encodeURIComponent(userId)}`, {
      method: "POST",
    });
    if (!response.ok) {
      throw new TransportError(`preload rejected with ${response.status}`);
    }
    const body = (await jsonBody(response, "preload")) as Record<string, unknown>;
    const profile = (body["profile"] ?? {}) as Record<string, unknown>;
    const rawTriggers = Array.isArray(profile["triggers"]) ? profile["triggers"] : [];
    return {
      userId: String(profile["user_id"] ?? userId),
      displayName: String(profile["display_name"] ?? userId),
      triggers: rawTriggers.map((t) => {
        const entry = t as Record<string, unknown>;
        return {
          triggerId: String(entry["trigger_id"] ?? ""),
          mediaRef: String(entry["media_ref"] ?? ""),
          caption: String(entry["caption"] ?? ""),
        };
      }),
      mediaKeys: Array.isArray(body["media_keys"]) ? body["media_keys"].map(String) : [],
    };
  }

  /** Media bytes for one trigger photo, as a blob ready for an object URL. */
  async mediaBlob(userId: string, key: string): Promise<Blob> {
    const response = await this.request(
      `/portal/media/${encodeURIComponent(userId)}/${encodeURIComponent(key)}`,
    );
    if (!response.ok) {
      throw new TransportError(`media ${key} rejected with ${response.status}`);
    }
    return response.blob();
  }
}
