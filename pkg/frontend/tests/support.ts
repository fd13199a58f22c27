/** Shared test scaffolding: a routable fetch stub for ApiClient. */

export interface StubCall {
  method: string;
  path: string;
  body: unknown;
  headers: Record<string, string>;
}

export type StubHandler = (call: StubCall) => [number, unknown] | undefined;

/** fetch replacement that routes through a handler and logs every call. */
export function fakeFetch(handler: StubHandler): {
  fetch: typeof fetch;
  calls: StubCall[];
} {
  const calls: StubCall[] = [];
  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const call: StubCall = {
      method: init?.method ?? "GET",
      path: String(input),
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
      headers: (init?.headers as Record<string, string>) ?? {},
    };
    calls.push(call);
    const answer = handler(call);
    if (!answer) {
      throw new Error(`unrouted request: ${call.method} ${call.path}`);
    }
    const [status, payload] = answer;
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return { fetch: impl, calls };
}

export const UPDATED = { message: "Database Successfully Updated", returnid: -1 };

export function updated(returnid: number): [number, unknown] {
  return [200, { message: "Database Successfully Updated", returnid }];
}
