/** Line transports: a spawned engine over stdio, or a TCP endpoint. */

import { spawn, type ChildProcess } from 'node:child_process';
import * as net from 'node:net';
import * as readline from 'node:readline';

import { ConnectError } from './errors.js';

export interface Transport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: (reason?: Error) => void): void;
  close(): Promise<void>;
}

export interface StdioEndpoint {
  kind: 'stdio';
  command: string;
  args: string[];
}

export interface TcpEndpoint {
  kind: 'tcp';
  host: string;
  port: number;
}

export type Endpoint = StdioEndpoint | TcpEndpoint;

/** Endpoint for `python -m reflexbridge serve --stdio`; the interpreter is
 * overridable via REFLEXBRIDGE_PYTHON. */
export function engineEndpoint(extraArgs: string[] = []): StdioEndpoint {
  return {
    kind: 'stdio',
    command: process.env.REFLEXBRIDGE_PYTHON ?? 'python3',
    args: ['-m', 'reflexbridge', 'serve', '--stdio', ...extraArgs],
  };
}

class StdioTransport implements Transport {
  private lineCb: (line: string) => void = () => {};
  private closeCb: (reason?: Error) => void = () => {};

  constructor(private child: ChildProcess) {
    const rl = readline.createInterface({ input: child.stdout! });
    rl.on('line', (line) => this.lineCb(line));
    child.on('exit', () => this.closeCb());
    child.on('error', (err) => this.closeCb(err));
  }

  send(line: string): void {
    if (!this.child.stdin?.writable) {
      throw new ConnectError('engine process is not accepting input');
    }
    this.child.stdin.write(line + '\n');
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: (reason?: Error) => void): void {
    this.closeCb = cb;
  }

  async close(): Promise<void> {
    if (this.child.exitCode === null) {
      this.child.stdin?.end();
      await new Promise<void>((resolve) => {
        const timer = setTimeout(() => {
          this.child.kill();
          resolve();
        }, 2000);
        this.child.once('exit', () => {
          clearTimeout(timer);
          resolve();
        });
      });
    }
  }
}

class TcpTransport implements Transport {
  private lineCb: (line: string) => void = () => {};
  private closeCb: (reason?: Error) => void = () => {};

  constructor(private socket: net.Socket) {
    const rl = readline.createInterface({ input: socket });
    rl.on('line', (line) => this.lineCb(line));
    socket.on('close', () => this.closeCb());
    socket.on('error', (err) => this.closeCb(err));
  }

  send(line: string): void {
    this.socket.write(line + '\n');
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: (reason?: Error) => void): void {
    this.closeCb = cb;
  }

  async close(): Promise<void> {
    await new Promise<void>((resolve) => this.socket.end(resolve));
    this.socket.destroy();
  }
}

export async function openTransport(endpoint: Endpoint): Promise<Transport> {
  if (endpoint.kind === 'stdio') {
    const child = spawn(endpoint.command, endpoint.args, {
      stdio: ['pipe', 'pipe', 'inherit'],
    });
    await new Promise<void>((resolve, reject) => {
      child.once('spawn', () => resolve());
      child.once('error', (err) => reject(new ConnectError(`cannot spawn engine: ${err.message}`)));
    });
    return new StdioTransport(child);
  }
  const socket = await new Promise<net.Socket>((resolve, reject) => {
    const s = net.createConnection({ host: endpoint.host, port: endpoint.port });
    s.once('connect', () => resolve(s));
    s.once('error', (err) => reject(new ConnectError(`cannot connect: ${err.message}`)));
  });
  return new TcpTransport(socket);
}
