import { TERMINAL_STATUSES, type RunEvent, type RunStatus } from "./types.js";

// One subscription per open run view; unsubscribe with the returned closer.
export interface EventFeed {
  subscribe(runId: string, offset: number, onEvent: (event: RunEvent) => void): () => void;
}

export function isTerminal(status: RunStatus | undefined): boolean {
  return !!status && TERMINAL_STATUSES.includes(status);
}

/** Live feed over the engine's /events SSE endpoint.
 *
 * Reconnection is handled here (not by native EventSource retry) so that a
 * new connection resumes from the last seen offset instead of replaying.
 */
export class SseFeed implements EventFeed {
  constructor(private base = "") {}

  subscribe(runId: string, offset: number, onEvent: (event: RunEvent) => void): () => void {
    let next = offset;
    let closed = false;
    let source: EventSource | null = null;

    const open = () => {
      if (closed) return;
      source = new EventSource(`${this.base}/api/runs/${runId}/events?offset=${next}`);
      source.onmessage = (e: MessageEvent) => {
        const event = JSON.parse(e.data) as RunEvent;
        next = event.seq + 1;
        onEvent(event);
        if (isTerminal(event.status)) close();
      };
      source.onerror = () => {
        source?.close();
        if (!closed) setTimeout(open, 1000);
      };
    };

    const close = () => {
      closed = true;
      source?.close();
    };

    open();
    return close;
  }
}

/** Replays a fixed event list synchronously; used by tests and for
 * reviewing finished runs without holding a connection open. */
export class ReplayFeed implements EventFeed {
  constructor(private events: RunEvent[]) {}

  subscribe(_runId: string, offset: number, onEvent: (event: RunEvent) => void): () => void {
    for (const event of this.events) {
      if (event.seq >= offset) onEvent(event);
    }
    return () => {};
  }
}
