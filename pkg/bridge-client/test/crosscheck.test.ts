import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  ServerError,
  Session,
  crosscheckKernel,
  engineEndpoint,
  f64,
  zeros,
} from '../src/index.js';

const TRACE = `
kernel trace(a: arr2d) -> f64 {
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += add42(a[i, i]) + add42(i64(a[i, i]));
    }
    return trace;
}
`;

describe('crosscheck against a corpus engine', () => {
  let session: Session;

  beforeAll(async () => {
    session = await Session.connect(engineEndpoint(['--corpus']), { pingEntity: 'add42' });
    await session.declare(TRACE, 'kernel');
    await session.declare('kernel one() -> f64 { return 1.0; }', 'kernel');
    await session.declare('kernel bad() -> f64 { return only32(1.5); }', 'kernel');
    await session.declare('int only32(int x) { return x; }');
  }, 20000);

  afterAll(async () => {
    await session.shutdown();
  });

  it('reproduces the flat-loop oracle value and a >=2x speedup', async () => {
    const report = await crosscheckKernel(session, 'trace', [zeros(100, 100)], 50);
    expect(report.value).toEqual({ t: 'f64', v: 8400.0 }); // 100 * (42 + 42)
    expect(report.speedup).toBeGreaterThanOrEqual(2.0);
    expect(report.dynamicSeconds).toBeGreaterThan(0);
    expect(report.jitSeconds).toBeGreaterThan(0);
  }, 60000);

  it('handles a trivial kernel', async () => {
    const report = await crosscheckKernel(session, 'one', [], 3);
    expect(report.value).toEqual({ t: 'f64', v: 1.0 });
  });

  it('reports the same error class from both paths', async () => {
    const dynErr = await session.runKernel('bad', []).catch((e) => e);
    const jitErr = await session.jitKernel('bad', []).catch((e) => e);
    expect(dynErr).toBeInstanceOf(ServerError);
    expect(jitErr).toBeInstanceOf(ServerError);
    expect((dynErr as ServerError).code).toBe((jitErr as ServerError).code);
    expect((dynErr as ServerError).code).toBe('NoViableOverload');
  });

  it('agrees on seeded-random inputs too', async () => {
    const args = [{ t: 'arr2d', rows: 25, cols: 25, gen: 'random', seed: 11 } as const];
    const report = await crosscheckKernel(session, 'trace', args, 5);
    const dyn = await session.runKernel('trace', args);
    expect(report.value).toEqual(dyn);
  });

  it('invoke agrees with the paper fixture semantics', async () => {
    expect(await session.invoke('add42', [f64(0.0)])).toEqual({ t: 'f64', v: 42.0 });
  });
});
