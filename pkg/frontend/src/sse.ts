// Minimal server-sent-events reader over fetch streaming. Shared by the
// browser app and the node test-suite, so it sticks to web-standard APIs.

export interface SseEvent {
  event: string;
  data: string;
}

/** Stateful line parser for an SSE byte stream fed in arbitrary chunks. */
export function createSseParser(onEvent: (e: SseEvent) => void) {
  let buffer = "";
  let eventName = "";
  let dataLines: string[] = [];

  function dispatch() {
    if (eventName !== "" || dataLines.length > 0) {
      onEvent({ event: eventName || "message", data: dataLines.join("\n") });
    }
    eventName = "";
    dataLines = [];
  }

  return (chunk: string): void => {
    buffer += chunk;
    for (;;) {
      const nl = buffer.indexOf("\n");
      if (nl < 0) return;
      let line = buffer.slice(0, nl);
      buffer = buffer.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);
      if (line === "") {
        dispatch();
      } else if (line.startsWith(":")) {
        // comment / keepalive
      } else if (line.startsWith("event:")) {
        eventName = line.slice("event:".length).trimStart();
      } else if (line.startsWith("data:")) {
        dataLines.push(line.slice("data:".length).trimStart());
      }
    }
  };
}

/** Drain a fetch Response as SSE, invoking onEvent per complete event. */
export async function consumeSse(
  response: Response,
  onEvent: (e: SseEvent) => void,
): Promise<void> {
  if (!response.body) throw new Error("response has no body to stream");
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parse = createSseParser(onEvent);
  for (;;) {
    const { done, value } = await reader.read();
    if (done) return;
    parse(decoder.decode(value, { stream: true }));
  }
}
