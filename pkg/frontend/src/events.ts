/**
 * Journal follower: long-polls the event feed and applies events in seq
 * order. A gap (received seq beyond the next expected) means this client
 * missed history, so it asks the owner for a full refetch instead of
 * guessing. Network errors back off and surface a stale flag; the UI is
 * never updated optimistically.
 */

import type { JournalEvent } from "./types.js";

export interface FollowerCallbacks {
  /** Apply one in-order event. */
  onEvent: (event: JournalEvent) => void;
  /** Rebuild from GET /cases/{id}; returns the seq now represented. */
  onGap: () => Promise<number>;
  /** Connectivity indicator for the stale badge. */
  onStale?: (stale: boolean) => void;
}

export interface FollowerOptions {
  wait?: number; // long-poll seconds
  minBackoffMs?: number;
  maxBackoffMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class EventFollower {
  private seq: number;
  private stopped = false;
  private backoffMs: number;

  constructor(
    private poll: (since: number, wait: number) => Promise<{ events: JournalEvent[]; seq: number }>,
    private callbacks: FollowerCallbacks,
    private options: FollowerOptions = {},
    startSeq = 0
  ) {
    this.seq = startSeq;
    this.backoffMs = options.minBackoffMs ?? 500;
  }

  get lastSeq(): number {
    return this.seq;
  }

  stop(): void {
    this.stopped = true;
  }

  /** One poll-apply cycle; returns the number of events applied. */
  async cycle(): Promise<number> {
    const wait = this.options.wait ?? 25;
    let batch;
    try {
      batch = await this.poll(this.seq, wait);
    } catch (error) {
      this.callbacks.onStale?.(true);
      const sleep = this.options.sleep ?? defaultSleep;
      await sleep(this.backoffMs);
      this.backoffMs = Math.min(this.backoffMs * 2, this.options.maxBackoffMs ?? 10_000);
      return 0;
    }
    this.callbacks.onStale?.(false);
    this.backoffMs = this.options.minBackoffMs ?? 500;
    let applied = 0;
    const events = [...batch.events].sort((a, b) => a.seq - b.seq);
    for (const event of events) {
      if (event.seq <= this.seq) continue; // replayed history
      if (event.seq !== this.seq + 1) {
        this.seq = await this.callbacks.onGap();
        return applied;
      }
      try {
        this.callbacks.onEvent(event);
      } catch {
        // An unconsumable event (unknown kind) is a protocol gap too.
        this.seq = await this.callbacks.onGap();
        return applied;
      }
      this.seq = event.seq;
      applied += 1;
    }
    return applied;
  }

  async run(): Promise<void> {
    while (!this.stopped) {
      await this.cycle();
    }
  }
}
