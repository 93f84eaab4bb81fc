// Thin HTTP client for the dispatch service.

import { consumeSse } from "./sse.js";
import type {
  DeliveryRecord,
  NetworkDoc,
  StatusEvent,
  TelemetryFrame,
} from "./types.js";

export async function fetchNetwork(base = ""): Promise<NetworkDoc> {
  const response = await fetch(`${base}/api/network`);
  if (!response.ok) throw new Error(`network fetch failed: ${response.status}`);
  return (await response.json()) as NetworkDoc;
}

export type SubmitResult =
  | { ok: true; record: DeliveryRecord }
  | { ok: false; status: number; error: string; detail: string };

export async function submitDelivery(
  base: string,
  src: string,
  dst: string,
  batteryFraction = 1.0,
): Promise<SubmitResult> {
  const response = await fetch(`${base}/api/deliveries`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({
      src,
      dst,
      initial_battery_fraction: batteryFraction,
    }),
  });
  const body = await response.json();
  if (response.status === 201) {
    return { ok: true, record: body as DeliveryRecord };
  }
  return {
    ok: false,
    status: response.status,
    error: body.error ?? "error",
    detail: body.detail ?? response.statusText,
  };
}

export interface TelemetryHandlers {
  onFrame: (frame: TelemetryFrame) => void;
  onStatus: (status: StatusEvent) => void;
  onDrop: () => void;
}

export interface TelemetrySubscription {
  close(): void;
}

/**
 * Subscribe to a delivery's event stream. On an unexpected drop the
 * handlers see onDrop and the subscription retries; the service replays
 * the latest frame on resubscribe, so panels resume seamlessly.
 */
export function streamTelemetry(
  base: string,
  deliveryId: string,
  handlers: TelemetryHandlers,
  retryMs = 1000,
): TelemetrySubscription {
  const controller = new AbortController();
  let finished = false;

  async function connectOnce(): Promise<void> {
    const response = await fetch(
      `${base}/api/deliveries/${deliveryId}/telemetry`,
      { signal: controller.signal },
    );
    if (!response.ok) throw new Error(`telemetry failed: ${response.status}`);
    await consumeSse(response, (event) => {
      if (event.event === "frame") {
        handlers.onFrame(JSON.parse(event.data) as TelemetryFrame);
      } else if (event.event === "status") {
        finished = true;
        handlers.onStatus(JSON.parse(event.data) as StatusEvent);
      }
    });
  }

  (async () => {
    while (!finished && !controller.signal.aborted) {
      try {
        await connectOnce();
        if (!finished) throw new Error("stream ended without status");
      } catch (err) {
        if (finished || controller.signal.aborted) return;
        handlers.onDrop();
        await new Promise((resolve) => setTimeout(resolve, retryMs));
      }
    }
  })();

  return {
    close() {
      controller.abort();
    },
  };
}
