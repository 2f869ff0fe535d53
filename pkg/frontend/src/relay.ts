/**
 * Development relay: serves the static debugger page and bridges browser
 * WebSocket connections to the engine's TCP debug server.
 *
 *   node dist/relay.js [--listen 8754] [--target-host 127.0.0.1]
 *
 * The browser picks the engine port with `?port=`, which the page forwards
 * to `/ws?port=N`; each WebSocket gets its own TCP connection.
 */

import * as fs from "node:fs";
import * as http from "node:http";
import * as net from "node:net";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { WebSocketServer, type WebSocket } from "ws";

const here = path.dirname(fileURLToPath(import.meta.url));
const roots = [path.join(here, "..", "public"), path.join(here, "..", "dist")];

const MIME: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".map": "application/json",
  ".css": "text/css",
};

function argValue(flag: string, fallback: string): string {
  const idx = process.argv.indexOf(flag);
  return idx >= 0 && process.argv[idx + 1] ? process.argv[idx + 1] : fallback;
}

function serveStatic(req: http.IncomingMessage, res: http.ServerResponse): void {
  const url = new URL(req.url ?? "/", "http://relay");
  const rel = url.pathname === "/" ? "index.html" : url.pathname.slice(1);
  for (const root of roots) {
    const file = path.join(root, rel);
    if (!file.startsWith(root) || !fs.existsSync(file) || !fs.statSync(file).isFile()) {
      continue;
    }
    res.writeHead(200, {
      "content-type": MIME[path.extname(file)] ?? "application/octet-stream",
    });
    fs.createReadStream(file).pipe(res);
    return;
  }
  res.writeHead(404);
  res.end("not found");
}

function bridge(ws: WebSocket, targetHost: string, port: number): void {
  const socket = net.createConnection({ host: targetHost, port });
  socket.setEncoding("utf-8");
  socket.on("data", (chunk: string) => ws.send(chunk));
  socket.on("close", () => ws.close());
  socket.on("error", () => ws.close());
  ws.on("message", (data) => socket.write(data.toString()));
  ws.on("close", () => socket.destroy());
  ws.on("error", () => socket.destroy());
}

export function startRelay(listenPort: number, targetHost: string): http.Server {
  const server = http.createServer(serveStatic);
  const wss = new WebSocketServer({ server, path: "/ws" });
  wss.on("connection", (ws, req) => {
    const url = new URL(req.url ?? "/ws", "http://relay");
    const port = Number(url.searchParams.get("port") ?? "7454");
    if (!Number.isInteger(port) || port <= 0) {
      ws.close();
      return;
    }
    bridge(ws, targetHost, port);
  });
  server.listen(listenPort, () => {
    const addr = server.address();
    const shown = typeof addr === "object" && addr ? addr.port : listenPort;
    console.log(`debugger ui on http://127.0.0.1:${shown}/?port=<engine-port>`);
  });
  return server;
}

const isMain = process.argv[1] === fileURLToPath(import.meta.url);
if (isMain) {
  startRelay(Number(argValue("--listen", "8754")), argValue("--target-host", "127.0.0.1"));
}
