/**
 * Wire protocol types and codecs for the engine's debug server.
 *
 * One JSON object per line. Integers travel as decimal strings and decode to
 * bigint so 64-bit values survive; floats stay numbers. Rendering follows
 * the engine's canonical text form so transcripts are comparable.
 */

export type ValueWire =
  | null
  | { t: "b"; v: boolean }
  | { t: "i"; v: string }
  | { t: "f"; v: number }
  | { t: "s"; v: string };

/** Decoded scalar: tags map onto distinct JS types. */
export type Value = null | boolean | bigint | number | string;

export interface FactWire {
  constraint: string;
  key: ValueWire[];
  data: ValueWire[];
}

export interface EventWire {
  kind: string;
  fact?: FactWire;
  rule?: number;
  active?: FactWire;
  partners?: FactWire[];
  consumed?: FactWire[];
  body?: FactWire[];
  reason?: string;
  depth?: number;
}

export interface SignatureWire {
  name: string;
  key: string[];
  data: string[];
}

export interface HelloMessage {
  type: "hello";
  handler: string;
  constraints: SignatureWire[];
  rules: string[];
}

export interface EventMessage {
  type: "event";
  seq: number;
  event: EventWire;
}

export interface ReplyMessage {
  type: "reply";
  id: number | null;
  ok: boolean;
  data?: Record<string, unknown>;
  error?: string;
}

export type ServerMessage = HelloMessage | EventMessage | ReplyMessage;

export function decodeValue(wire: ValueWire): Value {
  if (wire === null) return null;
  switch (wire.t) {
    case "b":
      return wire.v;
    case "i":
      return BigInt(wire.v);
    case "f":
      return wire.v;
    case "s":
      return wire.v;
  }
}

export function encodeValue(value: Value): ValueWire {
  if (value === null) return null;
  switch (typeof value) {
    case "boolean":
      return { t: "b", v: value };
    case "bigint":
      return { t: "i", v: value.toString() };
    case "number":
      return { t: "f", v: value };
    case "string":
      return { t: "s", v: value };
  }
}

const FLOAT_PLAIN_LIMIT = 1e16;

function renderFloat(v: number): string {
  if (Object.is(v, -0)) return "-0.0";
  if (Number.isInteger(v) && Math.abs(v) < FLOAT_PLAIN_LIMIT) {
    return v.toFixed(1);
  }
  return String(v);
}

/** Canonical text for one decoded value (matches the engine's CLI output). */
export function renderValue(value: Value): string {
  if (value === null) return "null";
  switch (typeof value) {
    case "boolean":
      return value ? "true" : "false";
    case "bigint":
      return value.toString();
    case "number":
      return renderFloat(value);
    case "string":
      return JSON.stringify(value);
  }
}

export function renderValueWire(wire: ValueWire): string {
  return renderValue(decodeValue(wire));
}

export function renderFact(fact: FactWire): string {
  const keys = fact.key.map(renderValueWire).join(", ");
  let text = `${fact.constraint}(${keys})`;
  if (fact.data.length > 0) {
    text += ` -> (${fact.data.map(renderValueWire).join(", ")})`;
  }
  return text;
}

export function renderEvent(event: EventWire): string {
  const parts: string[] = [event.kind];
  if (event.kind === "rule-fired") {
    parts.push(`rule=${event.rule}`);
    if (event.active) parts.push(`active=${renderFact(event.active)}`);
    if (event.body && event.body.length > 0) {
      parts.push(`body=[${event.body.map(renderFact).join(", ")}]`);
    }
    if (event.consumed && event.consumed.length > 0) {
      parts.push(`consumed=[${event.consumed.map(renderFact).join(", ")}]`);
    }
  } else if (event.fact) {
    parts.push(renderFact(event.fact));
  }
  if (event.reason) parts.push(`reason=${event.reason}`);
  if (event.depth !== undefined) parts.push(`depth=${event.depth}`);
  return parts.join(" ");
}

const TAG_RANK: Record<string, number> = { b: 1, i: 2, f: 3, s: 4 };

function rankOf(wire: ValueWire): number {
  return wire === null ? 0 : TAG_RANK[wire.t];
}

function compareStrings(a: string, b: string): number {
  // code-point order, matching the engine (not UTF-16 code-unit order)
  const av = [...a], bv = [...b];
  for (let i = 0; i < Math.min(av.length, bv.length); i++) {
    const d = av[i].codePointAt(0)! - bv[i].codePointAt(0)!;
    if (d !== 0) return d < 0 ? -1 : 1;
  }
  return av.length === bv.length ? 0 : av.length < bv.length ? -1 : 1;
}

/** Total order over wire values: null < bool < int < float < str. */
export function compareValueWire(a: ValueWire, b: ValueWire): number {
  const ra = rankOf(a), rb = rankOf(b);
  if (ra !== rb) return ra < rb ? -1 : 1;
  if (a === null || b === null) return 0;
  switch (a.t) {
    case "b": {
      const av = a.v ? 1 : 0, bv = (b as { v: boolean }).v ? 1 : 0;
      return av === bv ? 0 : av < bv ? -1 : 1;
    }
    case "i": {
      const av = BigInt(a.v), bv = BigInt((b as { v: string }).v);
      return av === bv ? 0 : av < bv ? -1 : 1;
    }
    case "f": {
      const av = a.v, bv = (b as { v: number }).v;
      if (av === bv) {
        const sa = Object.is(av, -0) ? -1 : 1, sb = Object.is(bv, -0) ? -1 : 1;
        return sa === sb ? 0 : sa < sb ? -1 : 1;
      }
      return av < bv ? -1 : 1;
    }
    case "s":
      return compareStrings(a.v, (b as { v: string }).v);
  }
}

export function compareKeys(a: ValueWire[], b: ValueWire[]): number {
  for (let i = 0; i < Math.min(a.length, b.length); i++) {
    const d = compareValueWire(a[i], b[i]);
    if (d !== 0) return d;
  }
  return a.length - b.length;
}

/** Stable identity of a fact's key within its constraint. */
export function keyId(fact: FactWire): string {
  return JSON.stringify(fact.key);
}

const TOKEN_RE = /"(?:[^"\\]|\\.)*"|\S+/g;
const INT_RE = /^[+-]?\d+$/;

function parseToken(token: string): ValueWire {
  if (token === "null") return null;
  if (token === "true") return { t: "b", v: true };
  if (token === "false") return { t: "b", v: false };
  if (token.startsWith('"')) return { t: "s", v: JSON.parse(token) as string };
  if (INT_RE.test(token)) return { t: "i", v: BigInt(token).toString() };
  if (/[.e]/i.test(token)) {
    const f = Number(token);
    if (Number.isFinite(f)) return { t: "f", v: f };
  }
  throw new Error(`bad value token ${JSON.stringify(token)}`);
}

/** Parse a line of canonical value literals (the tell form input). */
export function parseValueText(text: string): ValueWire[] {
  return (text.match(TOKEN_RE) ?? []).map(parseToken);
}

/** Splits a byte stream into newline-delimited records. */
export class LineBuffer {
  private pending = "";

  push(chunk: string, onLine: (line: string) => void): void {
    this.pending += chunk;
    for (;;) {
      const idx = this.pending.indexOf("\n");
      if (idx < 0) return;
      const line = this.pending.slice(0, idx).trim();
      this.pending = this.pending.slice(idx + 1);
      if (line.length > 0) onLine(line);
    }
  }
}
