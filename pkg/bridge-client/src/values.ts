/** Typed value encoding shared with the wire protocol.
 *
 * Scalars are `{t, v}` with explicit tags; non-finite floats travel as the
 * strings "inf" / "-inf" / "nan". JSON doubles round-trip bit-exactly;
 * integers are exact within Number.MAX_SAFE_INTEGER.
 */

export type ScalarTag = 'bool' | 'i32' | 'i64' | 'f32' | 'f64';

export interface ScalarValue {
  t: ScalarTag;
  v: number | boolean | 'inf' | '-inf' | 'nan';
}

export interface ArrayLiteral {
  t: 'arr2d';
  rows: number;
  cols: number;
  data: (number | 'inf' | '-inf' | 'nan')[];
}

export interface ArrayGenerated {
  t: 'arr2d';
  rows: number;
  cols: number;
  gen: 'zeros' | 'ones' | 'random';
  seed?: number;
}

export type Value = ScalarValue | ArrayLiteral | ArrayGenerated;

export const f64 = (v: number): ScalarValue => ({ t: 'f64', v: encodeFloat(v) });
export const f32 = (v: number): ScalarValue => ({ t: 'f32', v: encodeFloat(v) });
export const i64 = (v: number): ScalarValue => ({ t: 'i64', v: checkInt(v) });
export const i32 = (v: number): ScalarValue => ({ t: 'i32', v: checkInt(v) });
export const bool = (v: boolean): ScalarValue => ({ t: 'bool', v });

export const zeros = (rows: number, cols: number): ArrayGenerated => ({
  t: 'arr2d',
  rows,
  cols,
  gen: 'zeros',
});

export const ones = (rows: number, cols: number): ArrayGenerated => ({
  t: 'arr2d',
  rows,
  cols,
  gen: 'ones',
});

export const random = (rows: number, cols: number, seed: number): ArrayGenerated => ({
  t: 'arr2d',
  rows,
  cols,
  gen: 'random',
  seed,
});

function encodeFloat(v: number): number | 'inf' | '-inf' | 'nan' {
  if (Number.isNaN(v)) return 'nan';
  if (v === Infinity) return 'inf';
  if (v === -Infinity) return '-inf';
  return v;
}

function checkInt(v: number): number {
  if (!Number.isSafeInteger(v)) {
    throw new RangeError(`${v} is not an exactly representable integer`);
  }
  return v;
}

export function decodeScalar(value: ScalarValue): number | boolean {
  if (value.t === 'bool') return value.v as boolean;
  if (value.v === 'inf') return Infinity;
  if (value.v === '-inf') return -Infinity;
  if (value.v === 'nan') return NaN;
  return value.v as number;
}

/** Exact equality of wire values: tags and payloads, bit-for-bit. */
export function valuesEqual(a: unknown, b: unknown): boolean {
  return JSON.stringify(sort(a)) === JSON.stringify(sort(b));
}

function sort(v: unknown): unknown {
  if (Array.isArray(v)) return v.map(sort);
  if (v !== null && typeof v === 'object') {
    const out: Record<string, unknown> = {};
    for (const k of Object.keys(v as object).sort()) {
      out[k] = sort((v as Record<string, unknown>)[k]);
    }
    return out;
  }
  return v;
}
