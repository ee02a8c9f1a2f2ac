/** One protocol session over a live transport.
 *
 * Request ids are strictly increasing and at most one request is
 * outstanding at a time; a reply whose id differs from the in-flight
 * request's id kills the session. All semantics live server-side — the
 * client only encodes, decodes, and caches reflection summaries.
 */

import { ConnectError, ProtocolOrderError, ServerError } from './errors.js';
import { Endpoint, Transport, openTransport } from './transport.js';
import { Value } from './values.js';

export type ReflexKind =
  | 'IS_NAMESPACE'
  | 'IS_CLASS'
  | 'IS_TEMPLATE'
  | 'IS_FUNCTION'
  | 'IS_METHOD'
  | 'IS_DATA_MEMBER'
  | 'TYPE'
  | 'RETURN_TYPE'
  | 'ARG_TYPES'
  | 'NUM_OVERLOADS'
  | 'OVERLOAD_AT'
  | 'CALLABLE_ID';

export type ReflexFormat = 'STRING' | 'HANDLE' | 'OPTIMAL';

interface Pending {
  id: number;
  resolve: (reply: Reply) => void;
  reject: (err: Error) => void;
}

interface Reply {
  id: unknown;
  ok: boolean;
  value?: unknown;
  error?: string;
  code?: string;
}

export interface ConnectOptions {
  /** Entity reflected as the liveness ping; skipped when undefined
   * (a bare `stats` probe is used instead). */
  pingEntity?: string;
}

export class Session {
  private nextId = 1;
  private pending: Pending | null = null;
  private queue: Promise<unknown> = Promise.resolve();
  private closed: Error | null = null;

  /** qualified name -> reflection summaries observed so far */
  readonly declCache = new Map<string, Record<string, unknown>>();

  private constructor(private transport: Transport) {
    transport.onLine((line) => this.onLine(line));
    transport.onClose((reason) => {
      this.closed = reason ?? new ConnectError('transport closed');
      if (this.pending) {
        this.pending.reject(this.closed);
        this.pending = null;
      }
    });
  }

  static async connect(endpoint: Endpoint, options: ConnectOptions = {}): Promise<Session> {
    const transport = await openTransport(endpoint);
    const session = new Session(transport);
    try {
      if (options.pingEntity !== undefined) {
        await session.reflect(options.pingEntity, 'IS_CLASS', 'OPTIMAL');
      } else {
        await session.requestValue('stats', {});
      }
    } catch (err) {
      await transport.close();
      throw new ConnectError(`ping failed: ${(err as Error).message}`);
    }
    return session;
  }

  private onLine(line: string): void {
    const p = this.pending;
    if (p === null) {
      return; // nothing outstanding; stray output is dropped
    }
    let reply: Reply;
    try {
      reply = JSON.parse(line) as Reply;
    } catch (err) {
      p.reject(new ConnectError(`unparseable reply: ${line}`));
      this.pending = null;
      return;
    }
    if (reply.id !== p.id) {
      const err = new ProtocolOrderError(p.id, reply.id);
      this.closed = err;
      p.reject(err);
      this.pending = null;
      return;
    }
    this.pending = null;
    p.resolve(reply);
  }

  /** Send one request and await its reply; callers are serialized. */
  request(op: string, fields: Record<string, unknown>): Promise<Reply> {
    const run = async (): Promise<Reply> => {
      if (this.closed) throw this.closed;
      const id = this.nextId++;
      const line = JSON.stringify({ id, op, ...fields });
      const replyPromise = new Promise<Reply>((resolve, reject) => {
        this.pending = { id, resolve, reject };
      });
      this.transport.send(line);
      return replyPromise;
    };
    const result = this.queue.then(run);
    this.queue = result.catch(() => {});
    return result;
  }

  async requestValue(op: string, fields: Record<string, unknown>): Promise<unknown> {
    const reply = await this.request(op, fields);
    if (!reply.ok) {
      throw new ServerError(
        reply.code ?? 'Error',
        reply.error ?? 'unknown error',
        (reply.id as number) ?? -1,
        op,
      );
    }
    return reply.value;
  }

  // -- ops -----------------------------------------------------------------

  async declare(source: string, lang: 'cpp' | 'kernel' = 'cpp'): Promise<unknown> {
    return this.requestValue('declare', lang === 'cpp' ? { source } : { source, lang });
  }

  async reflect(
    entity: string,
    kind: ReflexKind,
    format: ReflexFormat = 'OPTIMAL',
    index?: number,
  ): Promise<unknown> {
    const fields: Record<string, unknown> = { entity, kind, format };
    if (index !== undefined) fields.index = index;
    const value = await this.requestValue('reflect', fields);
    if (kind.startsWith('IS_') || kind === 'TYPE' || kind === 'RETURN_TYPE') {
      const summary = this.declCache.get(entity) ?? {};
      summary[`${kind}:${format}`] = value;
      this.declCache.set(entity, summary);
    }
    return value;
  }

  async listMembers(entity: string): Promise<[string, number][]> {
    return (await this.requestValue('list_members', { entity })) as [string, number][];
  }

  async invoke(target: string, args: Value[], targs?: string[]): Promise<Value> {
    const fields: Record<string, unknown> = { target, args };
    if (targs !== undefined) fields.targs = targs;
    return (await this.requestValue('invoke', fields)) as Value;
  }

  async runKernel(kernel: string, args: Value[], reps = 1): Promise<Value> {
    return (await this.requestValue('run_kernel', { kernel, args, reps })) as Value;
  }

  async jitKernel(kernel: string, args: Value[], reps = 1): Promise<Value> {
    return (await this.requestValue('jit_kernel', { kernel, args, reps })) as Value;
  }

  async stats(): Promise<Record<string, unknown>> {
    return (await this.requestValue('stats', {})) as Record<string, unknown>;
  }

  async shutdown(): Promise<void> {
    try {
      await this.requestValue('shutdown', {});
    } finally {
      await this.close();
    }
  }

  async close(): Promise<void> {
    this.closed = this.closed ?? new ConnectError('session closed');
    await this.transport.close();
  }
}
