import { JSDOM } from 'jsdom';

export interface TestDom {
  dom: JSDOM;
  document: Document;
  root: HTMLElement;
}

export function makeDom(): TestDom {
  const dom = new JSDOM('<!doctype html><html><body><main id="root"></main></body></html>', {
    url: 'http://localhost/',
  });
  const document = dom.window.document as unknown as Document;
  const root = document.getElementById('root') as HTMLElement;
  return { dom, document, root };
}

export function fire(dom: JSDOM, element: Element, type: string): void {
  element.dispatchEvent(new dom.window.Event(type, { bubbles: true }));
}

export function setValue(dom: JSDOM, element: Element, value: string): void {
  (element as HTMLInputElement).value = value;
  fire(dom, element, 'input');
}

export function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
  headers: Record<string, string>;
}

/** Route-table fetch stub; handlers may be a response, a list consumed in
 * order (last one repeats), or a function of the recorded request. */
export function stubFetch(
  routes: Record<string, unknown>,
  requests: RecordedRequest[] = [],
): (input: string, init?: RequestInit) => Promise<Response> {
  const queues = new Map<string, unknown[]>();
  return async (input, init) => {
    const method = init?.method ?? 'GET';
    const url = input.replace(/^https?:\/\/[^/]+/, '');
    const recorded: RecordedRequest = {
      url,
      method,
      body: init?.body ? JSON.parse(String(init.body)) : null,
      headers: Object.fromEntries(
        Object.entries((init?.headers as Record<string, string>) ?? {}),
      ),
    };
    requests.push(recorded);
    const key = `${method} ${url}`;
    let handler = routes[key] ?? routes[url];
    if (handler === undefined) {
      return new Response(JSON.stringify({ detail: `no stub for ${key}` }), { status: 404 });
    }
    if (Array.isArray(handler) && handler.every((h) => h instanceof Response || typeof h === 'function')) {
      const queue = queues.get(key) ?? [...handler];
      queues.set(key, queue);
      handler = queue.length > 1 ? queue.shift() : queue[0];
    }
    if (typeof handler === 'function') {
      return (handler as (r: RecordedRequest) => Response | Promise<Response>)(recorded);
    }
    return (handler as Response).clone();
  };
}

export async function waitUntil(
  predicate: () => boolean | Promise<boolean>,
  timeoutMs = 10000,
  stepMs = 10,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
  throw new Error('condition not reached in time');
}
