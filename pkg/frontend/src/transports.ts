/**
 * Line transports: raw TCP for Node (tests, relay) and WebSocket for the
 * browser, which reaches the TCP server through the relay.
 */

import { LineBuffer } from "./protocol.js";
import type { Transport } from "./client.js";

export async function connectTcp(host: string, port: number): Promise<Transport> {
  const net = await import("node:net");
  const socket = net.createConnection({ host, port });
  const buffer = new LineBuffer();
  let lineHandler: (line: string) => void = () => undefined;
  let closeHandler: (error?: Error) => void = () => undefined;

  socket.setEncoding("utf-8");
  socket.on("data", (chunk: string) => buffer.push(chunk, (l) => lineHandler(l)));
  socket.on("error", (error: Error) => closeHandler(error));
  socket.on("close", () => closeHandler());

  await new Promise<void>((resolve, reject) => {
    socket.once("connect", resolve);
    socket.once("error", reject);
  });

  return {
    send: (line) => socket.write(line + "\n"),
    onLine: (handler) => {
      lineHandler = handler;
    },
    onClose: (handler) => {
      closeHandler = handler;
    },
    close: () => socket.destroy(),
  };
}

export function connectWebSocket(url: string): Promise<Transport> {
  return new Promise((resolve, reject) => {
    const ws = new WebSocket(url);
    const buffer = new LineBuffer();
    let lineHandler: (line: string) => void = () => undefined;
    let closeHandler: (error?: Error) => void = () => undefined;

    ws.onopen = () => {
      resolve({
        send: (line) => ws.send(line + "\n"),
        onLine: (handler) => {
          lineHandler = handler;
        },
        onClose: (handler) => {
          closeHandler = handler;
        },
        close: () => ws.close(),
      });
    };
    ws.onerror = () => {
      reject(new Error(`cannot reach ${url}`));
      closeHandler(new Error("websocket error"));
    };
    ws.onclose = () => closeHandler();
    ws.onmessage = (msg) => {
      const text = typeof msg.data === "string" ? msg.data : "";
      buffer.push(text.endsWith("\n") ? text : text + "\n", (l) => lineHandler(l));
    };
  });
}
