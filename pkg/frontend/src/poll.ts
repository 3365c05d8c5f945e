/** Fixed-interval polling loop.
 *
 * One tick runs immediately, then every `intervalMs`. A failing tick
 * reports the error through `onError` and the loop keeps going, so a
 * restarted service is picked up without a reload. Ticks never overlap:
 * the timer is rearmed only after the previous tick settles.
 */

export const POLL_INTERVAL_MS = 2000;

export interface PollHandle {
  stop(): void;
}

export function startPolling(
  tick: () => Promise<void>,
  onError: (err: unknown) => void,
  intervalMs: number = POLL_INTERVAL_MS,
): PollHandle {
  let stopped = false;
  let timer: ReturnType<typeof setTimeout> | null = null;

  const run = async () => {
    try {
      await tick();
    } catch (err) {
      onError(err);
    }
    if (!stopped) {
      timer = setTimeout(run, intervalMs);
    }
  };

  void run();

  return {
    stop() {
      stopped = true;
      if (timer !== null) {
        clearTimeout(timer);
      }
    },
  };
}
