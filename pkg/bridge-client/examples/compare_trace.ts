/** End-to-end fixture comparison: declare a templated function and the
 * trace kernel, run it on both engine paths, and report the speedup.
 *
 *   npm run demo
 */

import { Session, crosscheckKernel, engineEndpoint, zeros } from '../src/index.js';

const DECLS = `
template<class T>
T add42(T t) {
    return T(t + 42);
}
`;

const KERNEL = `
kernel trace(a: arr2d) -> f64 {
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += add42(a[i, i]) + add42(i64(a[i, i]));
    }
    return trace;
}
`;

async function main(): Promise<void> {
  const session = await Session.connect(engineEndpoint());
  try {
    await session.declare(DECLS);
    await session.declare(KERNEL, 'kernel');

    console.log('add42 is a template:', await session.reflect('add42', 'IS_TEMPLATE', 'STRING'));

    const report = await crosscheckKernel(session, 'trace', [zeros(100, 100)], 50);
    console.log(`trace(zeros 100x100) = ${JSON.stringify(report.value)}`);
    console.log(`dynamic path: ${(report.dynamicSeconds * 1e6).toFixed(1)} us/run`);
    console.log(`typed path:   ${(report.jitSeconds * 1e6).toFixed(1)} us/run`);
    console.log(`speedup:      ${report.speedup.toFixed(2)}x`);

    console.log('instantiations:', JSON.stringify(await session.stats(), null, 2));
  } finally {
    await session.shutdown();
  }
}

main().catch((err) => {
  console.error(err);
  process.exitCode = 1;
});
