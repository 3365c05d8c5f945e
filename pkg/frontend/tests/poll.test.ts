import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { POLL_INTERVAL_MS, startPolling } from "../src/poll.js";

describe("startPolling", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("ticks immediately and then every two seconds", async () => {
    let ticks = 0;
    const handle = startPolling(
      async () => {
        ticks += 1;
      },
      () => {},
    );
    await vi.advanceTimersByTimeAsync(0);
    expect(ticks).toBe(1);
    await vi.advanceTimersByTimeAsync(POLL_INTERVAL_MS - 1);
    expect(ticks).toBe(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(ticks).toBe(2);
    await vi.advanceTimersByTimeAsync(3 * POLL_INTERVAL_MS);
    expect(ticks).toBe(5);
    handle.stop();
  });

  it("keeps polling through failures and reports each one", async () => {
    let calls = 0;
    const errors: unknown[] = [];
    const handle = startPolling(
      async () => {
        calls += 1;
        if (calls < 3) throw new Error("connection refused");
      },
      (err) => errors.push(err),
    );
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(2 * POLL_INTERVAL_MS);
    expect(calls).toBe(3);
    expect(errors).toHaveLength(2);
    handle.stop();
  });

  it("stops cleanly", async () => {
    let ticks = 0;
    const handle = startPolling(
      async () => {
        ticks += 1;
      },
      () => {},
      50,
    );
    await vi.advanceTimersByTimeAsync(0);
    handle.stop();
    await vi.advanceTimersByTimeAsync(500);
    expect(ticks).toBe(1);
  });

  it("does not overlap a slow tick with the next one", async () => {
    const events: string[] = [];
    const handle = startPolling(
      async () => {
        events.push("start");
        await new Promise((resolve) => setTimeout(resolve, 3 * POLL_INTERVAL_MS));
        events.push("end");
      },
      () => {},
    );
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(4 * POLL_INTERVAL_MS);
    const starts = events.filter((e) => e === "start").length;
    const ends = events.filter((e) => e === "end").length;
    expect(starts).toBeLessThanOrEqual(ends + 1);
    handle.stop();
  });
});
