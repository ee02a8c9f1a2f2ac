/** Byte-identical replay of the golden transcripts against a live engine:
 * each file is self-contained and runs over a fresh session. */

import { readFileSync, readdirSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { engineEndpoint, openTransport } from '../src/transport.js';

const TRANSCRIPT_DIR = join(__dirname, '..', '..', 'tests', 'golden', 'transcripts');
const transcripts = readdirSync(TRANSCRIPT_DIR).filter((f) => f.endsWith('.txt')).sort();

async function replay(lines: string[]): Promise<string[]> {
  const transport = await openTransport(engineEndpoint());
  const replies: string[] = [];
  try {
    for (let i = 0; i < lines.length; i += 2) {
      const reply = await new Promise<string>((resolve, reject) => {
        transport.onLine(resolve);
        transport.onClose((err) => reject(err ?? new Error('closed')));
        transport.send(lines[i]);
      });
      replies.push(reply);
    }
  } finally {
    await transport.close();
  }
  return replies;
}

describe('golden transcript replay', () => {
  expect(transcripts.length).toBeGreaterThanOrEqual(8);

  for (const name of transcripts) {
    it(`replays ${name} byte-identically`, async () => {
      const lines = readFileSync(join(TRANSCRIPT_DIR, name), 'utf-8')
        .split('\n')
        .filter((l) => l.length > 0);
      const requests = lines.filter((_, i) => i % 2 === 0);
      const wantReplies = lines.filter((_, i) => i % 2 === 1);
      const replies = await replay(lines);
      expect(requests.length).toBe(wantReplies.length);
      expect(replies).toEqual(wantReplies);
    }, 30000);
  }
});
