/**
 * Session model: the single source of truth behind every debugger panel.
 *
 * Store and queue views are derived purely by folding the event log; nothing
 * else writes them, so the table shown after N events must equal a select
 * snapshot taken at the same point. Pause detection mirrors the server's
 * breakpoint matching over the same stream: the server blocks inside the
 * matching event, so the last delivered event is the pause point.
 */

import type { CommandArgs, ProtocolClient } from "./client.js";
import {
  compareKeys,
  keyId,
  type EventMessage,
  type EventWire,
  type FactWire,
  type HelloMessage,
  type ReplyMessage,
  type ValueWire,
} from "./protocol.js";

export interface BreakpointEntry {
  id: number;
  rule?: number;
  constraint?: string;
  step?: boolean;
}

export type RunState = "fixpoint" | "suspended" | "failed" | "running";

function eventFacts(event: EventWire): FactWire[] {
  const facts: FactWire[] = [];
  if (event.fact) facts.push(event.fact);
  if (event.active) facts.push(event.active);
  for (const group of [event.partners, event.consumed, event.body]) {
    if (group) facts.push(...group);
  }
  return facts;
}

function matchesBreakpoint(bp: BreakpointEntry, event: EventWire): boolean {
  if (bp.step) return event.kind === "dequeued";
  if (bp.rule !== undefined) {
    return event.kind === "rule-fired" && event.rule === bp.rule;
  }
  if (bp.constraint !== undefined) {
    return eventFacts(event).some((f) => f.constraint === bp.constraint);
  }
  return false;
}

export class SessionModel {
  hello: HelloMessage;
  events: EventMessage[] = [];
  queue: FactWire[] = [];
  breakpoints: BreakpointEntry[] = [];
  runState: RunState = "fixpoint";
  suspendReason: string | null = null;
  depth = 0;
  /** seq of the event the engine is paused inside, or null. */
  pausedAt: number | null = null;
  lastError: string | null = null;
  closed = false;
  closeReason: string | null = null;

  private store = new Map<string, Map<string, FactWire>>();
  private listeners: Array<() => void> = [];
  /** mirrors the server's one-shot pause-at-next-dequeued after a step */
  private stepArmed = false;

  constructor(private client: ProtocolClient, hello: HelloMessage) {
    this.hello = hello;
    for (const sig of hello.constraints) {
      this.store.set(sig.name, new Map());
    }
    client.onEvent((msg) => {
      this.applyEvent(msg);
      this.notify();
    });
    client.onClose((error) => {
      this.closed = true;
      this.closeReason = error ? error.message : "connection closed";
      this.notify();
    });
  }

  static async attach(client: ProtocolClient): Promise<SessionModel> {
    const hello = await client.hello;
    const session = new SessionModel(client, hello);
    await session.refreshBreakpoints();
    return session;
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  // -- event folding ------------------------------------------------------

  private applyEvent(msg: EventMessage): void {
    const event = msg.event;
    this.events.push(msg);
    switch (event.kind) {
      case "told":
        this.queue.push(event.fact!);
        this.runState = "running";
        break;
      case "dequeued":
        this.queue.shift();
        this.runState = "running";
        break;
      case "rule-fired":
        if (event.body) this.queue.push(...event.body);
        break;
      case "fact-stored": {
        const fact = event.fact!;
        this.store.get(fact.constraint)?.set(keyId(fact), fact);
        break;
      }
      case "fact-removed": {
        const fact = event.fact!;
        this.store.get(fact.constraint)?.delete(keyId(fact));
        break;
      }
      case "failure":
        this.runState = "failed";
        break;
      case "fixpoint":
        this.runState = "fixpoint";
        this.suspendReason = null;
        break;
      case "suspended":
        this.runState = "suspended";
        this.suspendReason = event.reason ?? null;
        break;
      case "tx-begin":
      case "tx-commit":
      case "tx-partial-commit":
      case "tx-rollback":
        if (event.depth !== undefined) this.depth = event.depth;
        break;
    }
    if (this.stepArmed && event.kind === "dequeued") {
      this.stepArmed = false;
      this.pausedAt = msg.seq;
    } else if (this.breakpoints.some((bp) => matchesBreakpoint(bp, event))) {
      this.pausedAt = msg.seq;
    }
  }

  /** Derived store table for one constraint, in key order. */
  storeTable(constraint: string): FactWire[] {
    const facts = [...(this.store.get(constraint)?.values() ?? [])];
    facts.sort((a, b) => compareKeys(a.key, b.key));
    return facts;
  }

  constraintNames(): string[] {
    return this.hello.constraints.map((sig) => sig.name);
  }

  get paused(): boolean {
    return this.pausedAt !== null;
  }

  // -- commands -----------------------------------------------------------

  private async run(cmd: string, args: CommandArgs = {}): Promise<ReplyMessage> {
    const reply = await this.client.request(cmd, args);
    this.lastError = reply.ok ? null : reply.error ?? "error";
    this.notify();
    return reply;
  }

  tell(constraint: string, key: ValueWire[], data: ValueWire[]): Promise<ReplyMessage> {
    return this.run("tell", { constraint, key, data });
  }

  select(constraint: string, key?: (ValueWire | "_")[]): Promise<ReplyMessage> {
    return this.run("select", key === undefined ? { constraint } : { constraint, key });
  }

  resume(): Promise<ReplyMessage> {
    return this.run("resume");
  }

  begin(): Promise<ReplyMessage> {
    return this.run("begin");
  }

  commit(): Promise<ReplyMessage> {
    return this.run("commit");
  }

  partialCommit(): Promise<ReplyMessage> {
    return this.run("partialCommit");
  }

  rollback(): Promise<ReplyMessage> {
    return this.run("rollback");
  }

  setLimit(n: number | null): Promise<ReplyMessage> {
    return this.run("limit", { n });
  }

  async addBreakpoint(
    target: { rule?: number; constraint?: string; step?: boolean },
  ): Promise<ReplyMessage> {
    const reply = await this.run("breakpoint.add", target);
    if (reply.ok) await this.refreshBreakpoints();
    return reply;
  }

  async removeBreakpoint(id: number): Promise<ReplyMessage> {
    const reply = await this.run("breakpoint.remove", { breakpoint: id });
    if (reply.ok) await this.refreshBreakpoints();
    return reply;
  }

  async refreshBreakpoints(): Promise<void> {
    const reply = await this.client.request("breakpoint.list");
    if (reply.ok && reply.data) {
      this.breakpoints = reply.data["breakpoints"] as BreakpointEntry[];
      this.notify();
    }
  }

  /** Release a pause; the engine runs until the next breakpoint match. */
  async continue_(): Promise<ReplyMessage> {
    return this.release("continue");
  }

  /** Release a pause and stop at the next dequeued fact. */
  async step(): Promise<ReplyMessage> {
    return this.release("step");
  }

  private async release(cmd: string): Promise<ReplyMessage> {
    // the next pausing event can arrive before the reply does; only clear
    // the marker if no newer pause superseded it meanwhile
    const before = this.pausedAt;
    if (cmd === "step") this.stepArmed = true;
    const reply = await this.run(cmd);
    if (!reply.ok) {
      if (cmd === "step") this.stepArmed = false;
      return reply;
    }
    if (this.pausedAt === before) this.pausedAt = null;
    this.notify();
    return reply;
  }

  close(): void {
    this.client.close();
  }
}
