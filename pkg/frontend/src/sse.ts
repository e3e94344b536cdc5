// Server-sent-events client over fetch streaming, so it works in the
// browser and under node tests alike (no EventSource dependency).

export interface SseEvent {
  event: string;
  data: string;
}

/** Incremental SSE frame parser; feed it chunks, it yields whole events. */
export class SseParser {
  private buffer = '';

  push(chunk: string): SseEvent[] {
    this.buffer += chunk;
    const events: SseEvent[] = [];
    let index: number;
    while ((index = this.buffer.indexOf('\n\n')) !== -1) {
      const frame = this.buffer.slice(0, index);
      this.buffer = this.buffer.slice(index + 2);
      const parsed = this.parseFrame(frame);
      if (parsed) events.push(parsed);
    }
    return events;
  }

  private parseFrame(frame: string): SseEvent | null {
    let event = 'message';
    const data: string[] = [];
    for (const line of frame.split('\n')) {
      if (line.startsWith(':')) continue; // keepalive comment
      if (line.startsWith('event:')) event = line.slice(6).trim();
      else if (line.startsWith('data:')) data.push(line.slice(5).trim());
    }
    if (data.length === 0) return null;
    return { event, data: data.join('\n') };
  }
}

export interface Subscription {
  close(): void;
}

/**
 * Subscribe to a session's event stream. Messages are delivered in stream
 * order; a gap or duplicate in stream_seq raises through onError since the
 * UI's log panel relies on exactly-once delivery.
 */
export function subscribeEvents(
  url: string,
  onMessage: (message: unknown) => void,
  onError: (error: unknown) => void = () => {},
): Subscription {
  const controller = new AbortController();
  let lastSeq: number | null = null;

  (async () => {
    try {
      const response = await fetch(url, {
        signal: controller.signal,
        headers: { Accept: 'text/event-stream' },
      });
      if (!response.ok || response.body === null) {
        throw new Error(`event stream failed: ${response.status}`);
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SseParser();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
          const message = JSON.parse(frame.data) as { stream_seq?: number };
          if (typeof message.stream_seq === 'number') {
            if (lastSeq !== null && message.stream_seq !== lastSeq + 1) {
              throw new Error(
                `stream gap: ${lastSeq} -> ${message.stream_seq}`,
              );
            }
            lastSeq = message.stream_seq;
          }
          onMessage(message);
        }
      }
    } catch (error) {
      if (!controller.signal.aborted) onError(error);
    }
  })();

  return { close: () => controller.abort() };
}
