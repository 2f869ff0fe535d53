/**
 * Protocol client: request/reply correlation plus the event stream, over a
 * pluggable line transport (TCP in Node, WebSocket relay in the browser).
 */

import type {
  EventMessage,
  HelloMessage,
  ReplyMessage,
  ServerMessage,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: (error?: Error) => void): void;
  close(): void;
}

export type CommandArgs = Record<string, unknown>;

export class ProtocolClient {
  readonly hello: Promise<HelloMessage>;
  private nextId = 1;
  private pending = new Map<number, (reply: ReplyMessage) => void>();
  private eventHandlers: Array<(event: EventMessage) => void> = [];
  private closeHandlers: Array<(error?: Error) => void> = [];
  private resolveHello!: (hello: HelloMessage) => void;
  private rejectHello!: (error: Error) => void;
  private closed = false;

  constructor(private transport: Transport) {
    this.hello = new Promise((resolve, reject) => {
      this.resolveHello = resolve;
      this.rejectHello = reject;
    });
    this.hello.catch(() => undefined); // surfaced through onClose as well
    transport.onLine((line) => this.handleLine(line));
    transport.onClose((error) => this.handleClose(error));
  }

  private handleLine(line: string): void {
    let msg: ServerMessage;
    try {
      msg = JSON.parse(line) as ServerMessage;
    } catch {
      return; // tolerate garbage on the stream
    }
    if (msg.type === "hello") {
      this.resolveHello(msg);
    } else if (msg.type === "event") {
      for (const handler of [...this.eventHandlers]) handler(msg);
    } else if (msg.type === "reply" && msg.id !== null) {
      const resolver = this.pending.get(msg.id);
      if (resolver) {
        this.pending.delete(msg.id);
        resolver(msg);
      }
    }
  }

  private handleClose(error?: Error): void {
    if (this.closed) return;
    this.closed = true;
    this.rejectHello(error ?? new Error("connection closed"));
    const failure: ReplyMessage = {
      type: "reply", id: null, ok: false, error: "connection-closed",
    };
    for (const resolver of this.pending.values()) resolver(failure);
    this.pending.clear();
    for (const handler of this.closeHandlers) handler(error);
  }

  onEvent(handler: (event: EventMessage) => void): void {
    this.eventHandlers.push(handler);
  }

  onClose(handler: (error?: Error) => void): void {
    this.closeHandlers.push(handler);
  }

  /** Send one command; resolves with its reply (ok or error). */
  request(cmd: string, args: CommandArgs = {}): Promise<ReplyMessage> {
    if (this.closed) {
      return Promise.resolve({
        type: "reply", id: null, ok: false, error: "connection-closed",
      });
    }
    const id = this.nextId++;
    const line = JSON.stringify({ id, cmd, ...args });
    return new Promise((resolve) => {
      this.pending.set(id, resolve);
      this.transport.send(line);
    });
  }

  close(): void {
    this.transport.close();
    this.handleClose();
  }
}
