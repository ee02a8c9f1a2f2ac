import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  ConnectError,
  ProtocolOrderError,
  ServerError,
  Session,
  engineEndpoint,
  f64,
  i64,
  valuesEqual,
  zeros,
} from '../src/index.js';
import type { Transport } from '../src/transport.js';

describe('session over a spawned engine', () => {
  let session: Session;

  beforeAll(async () => {
    session = await Session.connect(engineEndpoint(['--corpus']), { pingEntity: 'add42' });
  }, 20000);

  afterAll(async () => {
    await session.shutdown();
  });

  it('reflects fixture entities like the golden sweep', async () => {
    expect(await session.reflect('add42', 'IS_TEMPLATE', 'STRING')).toBe('true');
    expect(await session.reflect('MyClass', 'TYPE', 'STRING')).toBe('MyClass');
    expect(await session.reflect('scale', 'NUM_OVERLOADS', 'OPTIMAL')).toBe(2);
    expect(await session.reflect('MyClass::get', 'RETURN_TYPE', 'STRING')).toBe('f64');
  });

  it('caches reflection summaries', async () => {
    await session.reflect('add42', 'IS_TEMPLATE', 'STRING');
    expect(session.declCache.get('add42')).toMatchObject({ 'IS_TEMPLATE:STRING': 'true' });
  });

  it('surfaces server errors with request context', async () => {
    const err = await session.reflect('nope', 'TYPE', 'STRING').catch((e) => e);
    expect(err).toBeInstanceOf(ServerError);
    expect((err as ServerError).code).toBe('NotFound');
    expect((err as ServerError).op).toBe('reflect');
  });

  it('lists members in declaration order', async () => {
    const names = (await session.listMembers('MyClass')).map(([n]) => n);
    expect(names).toEqual(['x', 'get']);
  });

  it('invokes the fixture template on both literal tags', async () => {
    expect(await session.invoke('add42', [f64(0.0)])).toEqual({ t: 'f64', v: 42.0 });
    expect(await session.invoke('add42', [i64(0)])).toEqual({ t: 'i64', v: 42 });
    expect(await session.invoke('add42', [f64(1.5)], ['f64'])).toEqual({ t: 'f64', v: 43.5 });
  });

  it('round-trips values exactly through the boundary', async () => {
    const awkward = 0.1 + 0.2; // not representable in short decimal
    const reply = await session.invoke('scale', [f64(awkward)]);
    expect(reply).toEqual({ t: 'f64', v: awkward * 2.0 });
    const big = Number.MAX_SAFE_INTEGER - 41;
    const intReply = await session.invoke('add42', [i64(big)]);
    expect(intReply).toEqual({ t: 'i64', v: big + 42 });
  });

  it('keeps request ids strictly increasing in reply order', async () => {
    const r1 = await session.request('stats', {});
    const r2 = await session.request('stats', {});
    const r3 = await session.request('stats', {});
    expect([r1.id, r2.id, r3.id]).toEqual(
      [r1.id, (r1.id as number) + 1, (r1.id as number) + 2],
    );
  });
});

describe('connect failures', () => {
  it('rejects a bad executable path', async () => {
    await expect(
      Session.connect({ kind: 'stdio', command: '/no/such/engine', args: [] }),
    ).rejects.toBeInstanceOf(ConnectError);
  });

  it('rejects a closed TCP port', async () => {
    await expect(
      Session.connect({ kind: 'tcp', host: '127.0.0.1', port: 1 }),
    ).rejects.toBeInstanceOf(ConnectError);
  });
});

describe('protocol ordering', () => {
  it('rejects out-of-order reply ids', async () => {
    let lineCb: (line: string) => void = () => {};
    const fake: Transport = {
      send(line: string) {
        const req = JSON.parse(line) as { id: number };
        // reply with a wrong id
        setImmediate(() => lineCb(JSON.stringify({ id: req.id + 7, ok: true, value: null })));
      },
      onLine(cb) {
        lineCb = cb;
      },
      onClose() {},
      async close() {},
    };
    const openTransportModule = await import('../src/transport.js');
    const spy = { ...openTransportModule };
    // construct a Session through its private path via connect() is not
    // possible with a fake endpoint, so reach the constructor through a
    // subclass trick: Session.connect would ping; instead test request()
    // directly on a hand-built instance.
    const session = Reflect.construct(Session as unknown as new (t: Transport) => Session, [fake]);
    await expect(session.request('stats', {})).rejects.toBeInstanceOf(ProtocolOrderError);
    void spy;
  });
});

describe('value helpers', () => {
  it('compares wire values structurally', () => {
    expect(valuesEqual({ t: 'f64', v: 1.5 }, { v: 1.5, t: 'f64' })).toBe(true);
    expect(valuesEqual({ t: 'f64', v: 1.5 }, { t: 'f64', v: 1.5000001 })).toBe(false);
    expect(valuesEqual({ t: 'i64', v: 1 }, { t: 'f64', v: 1 })).toBe(false);
  });

  it('refuses unsafe integers', () => {
    expect(() => i64(2 ** 60)).toThrow(RangeError);
  });

  it('builds array generators', () => {
    expect(zeros(2, 3)).toEqual({ t: 'arr2d', rows: 2, cols: 3, gen: 'zeros' });
  });
});
