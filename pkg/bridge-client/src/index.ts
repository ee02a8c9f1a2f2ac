export { ConnectError, MismatchError, ProtocolOrderError, ServerError } from './errors.js';
export { crosscheckKernel, type CrosscheckReport } from './crosscheck.js';
export { Session, type ConnectOptions, type ReflexFormat, type ReflexKind } from './session.js';
export {
  engineEndpoint,
  openTransport,
  type Endpoint,
  type StdioEndpoint,
  type TcpEndpoint,
  type Transport,
} from './transport.js';
export * from './values.js';
