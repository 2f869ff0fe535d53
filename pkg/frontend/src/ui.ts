/**
 * Browser debugger: event console, store and queue views, breakpoints,
 * stepping, tells, and transactions over one live session.
 *
 * The page connects through the relay's WebSocket endpoint; `?port=` picks
 * the engine's TCP port. All panels render from the SessionModel only.
 */

import { ProtocolClient } from "./client.js";
import {
  parseValueText,
  renderEvent,
  renderFact,
  renderValueWire,
} from "./protocol.js";
import { SessionModel } from "./session.js";
import { connectWebSocket } from "./transports.js";

const MAX_LOG_ROWS = 400;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

class DebuggerApp {
  private session: SessionModel | null = null;
  private root: HTMLElement;
  private banner = el("div", { class: "banner hidden" });
  private statusLine = el("span", { class: "status" }, "disconnected");
  private rendering = false;

  constructor(root: HTMLElement) {
    this.root = root;
    this.buildShell();
  }

  private enginePort(): number {
    const param = new URLSearchParams(location.search).get("port");
    return param ? Number(param) : 7454;
  }

  private relayUrl(): string {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    return `${proto}://${location.host}/ws?port=${this.enginePort()}`;
  }

  private showError(text: string): void {
    this.banner.textContent = text;
    this.banner.classList.remove("hidden");
  }

  private clearError(): void {
    this.banner.classList.add("hidden");
  }

  async connect(): Promise<void> {
    this.clearError();
    this.statusLine.textContent = "connecting...";
    try {
      const transport = await connectWebSocket(this.relayUrl());
      const client = new ProtocolClient(transport);
      this.session = await SessionModel.attach(client);
      this.session.subscribe(() => this.scheduleRender());
      this.render();
    } catch (error) {
      this.session = null;
      this.statusLine.textContent = "disconnected";
      this.showError(`connection failed: ${(error as Error).message} (retry below)`);
      this.render();
    }
  }

  private scheduleRender(): void {
    if (this.rendering) return;
    this.rendering = true;
    requestAnimationFrame(() => {
      this.rendering = false;
      this.render();
    });
  }

  // -- static shell ---------------------------------------------------------

  private panels = {
    controls: el("div", { class: "panel controls" }),
    breakpoints: el("div", { class: "panel breakpoints" }),
    store: el("div", { class: "panel store" }),
    queue: el("div", { class: "panel queue" }),
    log: el("div", { class: "panel log" }),
  };

  private buildShell(): void {
    const connectBtn = el("button", {}, "reconnect");
    connectBtn.onclick = () => {
      this.session?.close();
      void this.connect();
    };
    this.root.append(
      el("header", {},
        el("h1", {}, "rule engine debugger"),
        this.statusLine,
        connectBtn,
      ),
      this.banner,
      el("main", {},
        el("div", { class: "column" }, this.panels.controls, this.panels.breakpoints, this.panels.queue),
        el("div", { class: "column" }, this.panels.store),
        el("div", { class: "column wide" }, this.panels.log),
      ),
    );
  }

  // -- rendering ------------------------------------------------------------

  private render(): void {
    const s = this.session;
    if (!s) {
      this.statusLine.textContent = "disconnected";
      return;
    }
    if (s.closed) {
      this.statusLine.textContent = "disconnected";
      this.showError(`connection lost: ${s.closeReason ?? ""} (reconnect to resume)`);
    } else {
      const pause = s.paused ? ` | paused at #${s.pausedAt}` : "";
      this.statusLine.textContent =
        `${s.hello.handler} | ${s.runState}` +
        (s.suspendReason ? ` (${s.suspendReason})` : "") +
        ` | depth ${s.depth}${pause}`;
    }
    if (s.lastError) this.showError(`error: ${s.lastError}`);
    this.renderControls(s);
    this.renderBreakpoints(s);
    this.renderStore(s);
    this.renderQueue(s);
    this.renderLog(s);
  }

  private renderControls(s: SessionModel): void {
    const panel = this.panels.controls;
    panel.replaceChildren(el("h2", {}, "controls"));

    const constraintSel = el("select", {});
    for (const name of s.constraintNames()) {
      constraintSel.append(el("option", { value: name }, name));
    }
    const valuesInput = el("input", {
      placeholder: 'values: "x" 0 10', class: "grow",
    });
    const tellBtn = el("button", {}, "tell");
    tellBtn.onclick = () => {
      const sig = s.hello.constraints.find((c) => c.name === constraintSel.value);
      if (!sig) return;
      try {
        const values = parseValueText(valuesInput.value);
        const keys = values.slice(0, sig.key.length);
        const data = values.slice(sig.key.length);
        void s.tell(constraintSel.value, keys, data);
      } catch (error) {
        this.showError(`parse: ${(error as Error).message}`);
      }
    };
    panel.append(el("div", { class: "row" }, constraintSel, valuesInput, tellBtn));

    const mk = (label: string, fn: () => void, enabled = true) => {
      const b = el("button", {}, label);
      b.disabled = !enabled;
      b.onclick = fn;
      return b;
    };
    panel.append(
      el("div", { class: "row" },
        mk("continue", () => void s.continue_(), s.paused),
        mk("step", () => void s.step(), s.paused),
        mk("resume", () => void s.resume(), !s.paused),
      ),
      el("div", { class: "row" },
        mk("begin", () => void s.begin()),
        mk("commit", () => void s.commit()),
        mk("partial", () => void s.partialCommit()),
        mk("rollback", () => void s.rollback()),
      ),
    );

    const limitInput = el("input", { placeholder: "goal limit", class: "short" });
    panel.append(el("div", { class: "row" },
      limitInput,
      mk("set limit", () => {
        const text = limitInput.value.trim();
        void s.setLimit(text === "" || text === "off" ? null : Number(text));
      }),
    ));
  }

  private renderBreakpoints(s: SessionModel): void {
    const panel = this.panels.breakpoints;
    panel.replaceChildren(el("h2", {}, "breakpoints"));
    const list = el("ul", {});
    for (const bp of s.breakpoints) {
      const label = bp.step
        ? "every dequeued (step mode)"
        : bp.rule !== undefined
          ? `rule ${bp.rule}: ${s.hello.rules[bp.rule - 1] ?? ""}`
          : `constraint ${bp.constraint}`;
      const remove = el("button", { class: "mini" }, "x");
      remove.onclick = () => void s.removeBreakpoint(bp.id);
      list.append(el("li", {}, remove, ` ${label}`));
    }
    panel.append(list);

    const ruleSel = el("select", {});
    s.hello.rules.forEach((label, i) => {
      ruleSel.append(el("option", { value: String(i + 1) }, `${i + 1}: ${label}`));
    });
    const addRule = el("button", {}, "break on rule");
    addRule.onclick = () => void s.addBreakpoint({ rule: Number(ruleSel.value) });

    const conSel = el("select", {});
    for (const name of s.constraintNames()) {
      conSel.append(el("option", { value: name }, name));
    }
    const addCon = el("button", {}, "break on constraint");
    addCon.onclick = () => void s.addBreakpoint({ constraint: conSel.value });

    const addStep = el("button", {}, "step mode");
    addStep.onclick = () => void s.addBreakpoint({ step: true });

    panel.append(
      el("div", { class: "row" }, ruleSel, addRule),
      el("div", { class: "row" }, conSel, addCon, addStep),
    );
  }

  private renderStore(s: SessionModel): void {
    const panel = this.panels.store;
    panel.replaceChildren(el("h2", {}, "store"));
    for (const name of s.constraintNames()) {
      const facts = s.storeTable(name);
      if (facts.length === 0) continue;
      const table = el("table", {});
      table.append(el("caption", {}, `${name} (${facts.length})`));
      for (const fact of facts) {
        table.append(el("tr", {},
          el("td", {}, fact.key.map(renderValueWire).join(", ") || "()"),
          el("td", {}, fact.data.map(renderValueWire).join(", ")),
        ));
      }
      panel.append(table);
    }
  }

  private renderQueue(s: SessionModel): void {
    const panel = this.panels.queue;
    panel.replaceChildren(el("h2", {}, `queue (${s.queue.length})`));
    const list = el("ol", {});
    for (const fact of s.queue.slice(0, 50)) {
      list.append(el("li", {}, renderFact(fact)));
    }
    if (s.queue.length > 50) list.append(el("li", {}, "..."));
    panel.append(list);
  }

  private renderLog(s: SessionModel): void {
    const panel = this.panels.log;
    panel.replaceChildren(el("h2", {}, `events (${s.events.length})`));
    const table = el("table", {});
    for (const msg of s.events.slice(-MAX_LOG_ROWS)) {
      const row = el("tr", {},
        el("td", { class: "seq" }, String(msg.seq)),
        el("td", {}, renderEvent(msg.event)),
      );
      if (msg.seq === s.pausedAt) row.classList.add("paused");
      table.append(row);
    }
    panel.append(table);
    panel.scrollTop = panel.scrollHeight;
  }
}

export function start(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const app = new DebuggerApp(root);
  void app.connect();
}

start();
