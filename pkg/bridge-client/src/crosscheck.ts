/** Run a kernel on both server-side paths, insist the values agree, and
 * report client-measured timings.
 *
 * Replies carry no timestamps by design, so timing wraps the request
 * round-trip; the reps parameter makes server compute dominate it. Both
 * paths are warmed (and the JIT specialized) by an untimed run first.
 */

import { MismatchError } from './errors.js';
import { Session } from './session.js';
import { Value, valuesEqual } from './values.js';

export interface CrosscheckReport {
  kernel: string;
  value: Value;
  reps: number;
  dynamicSeconds: number; // per repetition
  jitSeconds: number; // per repetition
  speedup: number;
}

async function timed(fn: () => Promise<unknown>): Promise<number> {
  const t0 = process.hrtime.bigint();
  await fn();
  return Number(process.hrtime.bigint() - t0) / 1e9;
}

export async function crosscheckKernel(
  session: Session,
  kernel: string,
  args: Value[],
  reps = 50,
): Promise<CrosscheckReport> {
  const dynValue = await session.runKernel(kernel, args, 1);
  const jitValue = await session.jitKernel(kernel, args, 1); // also specializes
  if (!valuesEqual(dynValue, jitValue)) {
    throw new MismatchError(dynValue, jitValue);
  }
  const dynamicSeconds = (await timed(() => session.runKernel(kernel, args, reps))) / reps;
  const jitSeconds = (await timed(() => session.jitKernel(kernel, args, reps))) / reps;
  return {
    kernel,
    value: jitValue,
    reps,
    dynamicSeconds,
    jitSeconds,
    speedup: dynamicSeconds / jitSeconds,
  };
}
