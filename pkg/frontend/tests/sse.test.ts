import { describe, expect, it } from "vitest";

import { createSseParser, type SseEvent } from "../src/sse.js";

function collect(chunks: string[]): SseEvent[] {
  const events: SseEvent[] = [];
  const feed = createSseParser((e) => events.push(e));
  for (const chunk of chunks) feed(chunk);
  return events;
}

describe("sse parser", () => {
  it("parses a complete event", () => {
    const events = collect(['event: frame\ndata: {"clock": 1}\n\n']);
    expect(events).toEqual([{ event: "frame", data: '{"clock": 1}' }]);
  });

  it("handles chunk boundaries mid-line and mid-event", () => {
    const events = collect([
      "event: fra",
      "me\nda",
      'ta: {"clock": 2}\n',
      "\nevent: status\n",
      'data: {"status": "delivered"}\n\n',
    ]);
    expect(events).toEqual([
      { event: "frame", data: '{"clock": 2}' },
      { event: "status", data: '{"status": "delivered"}' },
    ]);
  });

  it("joins multi-line data and skips comments", () => {
    const events = collect([": keepalive\ndata: one\ndata: two\n\n"]);
    expect(events).toEqual([{ event: "message", data: "one\ntwo" }]);
  });

  it("tolerates CRLF line endings", () => {
    const events = collect(["event: frame\r\ndata: 1\r\n\r\n"]);
    expect(events).toEqual([{ event: "frame", data: "1" }]);
  });

  it("emits nothing for a blank flush without pending fields", () => {
    expect(collect(["\n\n\n"])).toEqual([]);
  });
});
