/** Client-side error taxonomy. */

export class ConnectError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ConnectError';
  }
}

/** An ok:false reply, carrying the server's stable error code and the
 * request it answered. */
export class ServerError extends Error {
  readonly code: string;
  readonly requestId: number;
  readonly op: string;

  constructor(code: string, message: string, requestId: number, op: string) {
    super(`${op} (id ${requestId}): ${code}: ${message}`);
    this.name = 'ServerError';
    this.code = code;
    this.requestId = requestId;
    this.op = op;
  }
}

/** The two execution paths disagreed on a kernel result. */
export class MismatchError extends Error {
  constructor(
    readonly dynamicValue: unknown,
    readonly jitValue: unknown,
  ) {
    super(
      `paths disagree: dynamic=${JSON.stringify(dynamicValue)} jit=${JSON.stringify(jitValue)}`,
    );
    this.name = 'MismatchError';
  }
}

/** A reply arrived whose id does not match the outstanding request. */
export class ProtocolOrderError extends Error {
  constructor(expected: number, got: unknown) {
    super(`expected reply id ${expected}, got ${JSON.stringify(got)}`);
    this.name = 'ProtocolOrderError';
  }
}
