/**
 * Host wire protocol, client side.
 *
 * Mirrors the host's JSON message vocabulary exactly: commands go up as
 * `{"type": "command", ...}` bodies, state comes back as poll responses.
 * Decoding is strict so a drifting host surfaces as a loud SchemaError
 * instead of a half-rendered view.
 */

export type CommandKind =
  | "select-trigger"
  | "start-recording"
  | "stop-recording"
  | "speak-response"
  | "play-response"
  | "home";

export const COMMAND_KINDS: readonly CommandKind[] = [
  "select-trigger",
  "start-recording",
  "stop-recording",
  "speak-response",
  "play-response",
  "home",
];

// payload rule per kind: required, forbidden, or optional
const PAYLOAD_RULE: Record<CommandKind, "required" | "forbidden" | "optional"> = {
  "select-trigger": "required",
  "start-recording": "forbidden",
  "stop-recording": "forbidden",
  "speak-response": "required",
  "play-response": "optional",
  home: "forbidden",
};

export interface Command {
  kind: CommandKind;
  sessionId: string;
  turnIndex: number | null;
  payload: string | null;
}

export interface PollResponse {
  sessionState: string;
  pendingCommand: Command | null;
  activeTrigger: string | null;
  displayText: string | null;
  stateToken: number;
}

export interface Ack {
  ok: boolean;
  stateToken: number;
  errorDetail: string | null;
}

export class SchemaError extends Error {}

export function makeCommand(
  kind: CommandKind,
  sessionId: string,
  options: { turnIndex?: number; payload?: string } = {},
): Command {
  const command: Command = {
    kind,
    sessionId,
    turnIndex: options.turnIndex ?? null,
    payload: options.payload ?? null,
  };
  validateCommand(command);
  return command;
}

function validateCommand(command: Command): void {
  if (!COMMAND_KINDS.includes(command.kind)) {
    throw new SchemaError(`Command.kind: unknown kind ${JSON.stringify(command.kind)}`);
  }
  if (!command.sessionId) {
    throw new SchemaError("Command.session_id: must be non-empty");
  }
  if (command.turnIndex !== null && command.turnIndex < 1) {
    throw new SchemaError(`Command.turn_index: must be >= 1, got ${command.turnIndex}`);
  }
  const rule = PAYLOAD_RULE[command.kind];
  if (rule === "required" && !command.payload) {
    throw new SchemaError(`Command.payload: required for kind ${JSON.stringify(command.kind)}`);
  }
  if (rule === "forbidden" && command.payload !== null) {
    throw new SchemaError(`Command.payload: not allowed for kind ${JSON.stringify(command.kind)}`);
  }
}

export function encodeCommand(command: Command): Record<string, unknown> {
  validateCommand(command);
  return {
    type: "command",
    kind: command.kind,
    session_id: command.sessionId,
    turn_index: command.turnIndex,
    payload: command.payload,
  };
}

type Json = Record<string, unknown>;

function asObject(raw: unknown, what: string): Json {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SchemaError(`${what}: expected object`);
  }
  return raw as Json;
}

function stringField(d: Json, key: string, what: string, optional = false): string | null {
  const value = d[key];
  if (value === undefined || value === null) {
    if (optional) return null;
    throw new SchemaError(`${what}.${key}: missing`);
  }
  if (typeof value !== "string") {
    throw new SchemaError(`${what}.${key}: expected string`);
  }
  return value;
}

function intField(d: Json, key: string, what: string): number {
  const value = d[key];
  if (typeof value !== "number" || !Number.isInteger(value)) {
    throw new SchemaError(`${what}.${key}: expected integer`);
  }
  return value;
}

export function decodeCommand(raw: unknown): Command {
  const d = asObject(raw, "Command");
  if (d["type"] !== "command") {
    throw new SchemaError(`Command.type: expected "command", got ${JSON.stringify(d["type"])}`);
  }
  const kind = stringField(d, "kind", "Command") as CommandKind;
  const turnIndexRaw = d["turn_index"];
  const command: Command = {
    kind,
    sessionId: stringField(d, "session_id", "Command") ?? "",
    turnIndex:
      turnIndexRaw === undefined || turnIndexRaw === null
        ? null
        : intField(d, "turn_index", "Command"),
    payload: stringField(d, "payload", "Command", true),
  };
  validateCommand(command);
  return command;
}

export function decodePollResponse(raw: unknown): PollResponse {
  const d = asObject(raw, "PollResponse");
  if (d["type"] !== "poll_response") {
    throw new SchemaError(
      `PollResponse.type: expected "poll_response", got ${JSON.stringify(d["type"])}`,
    );
  }
  const pendingRaw = d["pending_command"];
  const stateToken = intField(d, "state_token", "PollResponse");
  if (stateToken < 0) {
    throw new SchemaError(`PollResponse.state_token: must be >= 0, got ${stateToken}`);
  }
  return {
    sessionState: stringField(d, "session_state", "PollResponse") ?? "",
    pendingCommand:
      pendingRaw === undefined || pendingRaw === null ? null : decodeCommand(pendingRaw),
    activeTrigger: stringField(d, "active_trigger", "PollResponse", true),
    displayText: stringField(d, "display_text", "PollResponse", true),
    stateToken,
  };
}

export function decodeAck(raw: unknown): Ack {
  const d = asObject(raw, "Ack");
  if (d["type"] !== "ack") {
    throw new SchemaError(`Ack.type: expected "ack", got ${JSON.stringify(d["type"])}`);
  }
  const ok = d["ok"];
  if (typeof ok !== "boolean") {
    throw new SchemaError("Ack.ok: expected boolean");
  }
  return {
    ok,
    stateToken: intField(d, "state_token", "Ack"),
    errorDetail: stringField(d, "error_detail", "Ack", true),
  };
}
