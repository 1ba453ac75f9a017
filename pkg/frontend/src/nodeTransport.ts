// Node-side transport over raw TCP; used by tests and CLI tooling.

import * as net from 'node:net';

import type { Transport } from './protocol.js';

export class TcpTransport implements Transport {
  private handlers: Array<(line: string) => void> = [];
  private buffer = '';

  private constructor(private socket: net.Socket) {
    socket.setEncoding('utf-8');
    socket.on('data', (chunk: string) => {
      this.buffer += chunk;
      let idx = this.buffer.indexOf('\n');
      while (idx >= 0) {
        const line = this.buffer.slice(0, idx).trim();
        this.buffer = this.buffer.slice(idx + 1);
        if (line.length > 0) {
          for (const handler of this.handlers) {
            handler(line);
          }
        }
        idx = this.buffer.indexOf('\n');
      }
    });
  }

  static connect(host: string, port: number, timeoutMs = 10_000): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () => resolve(new TcpTransport(socket)));
      socket.setTimeout(timeoutMs, () => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      });
      socket.on('error', reject);
    });
  }

  send(line: string): void {
    this.socket.write(line + '\n');
  }

  onLine(handler: (line: string) => void): void {
    this.handlers.push(handler);
  }

  close(): void {
    this.socket.end();
    this.socket.destroy();
  }
}
