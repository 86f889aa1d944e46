/**
 * Request plumbing: monotone sequence numbers so stale responses are
 * dropped, and a rate limiter that keeps interactive dragging at or
 * under the request budget (trailing call always fires with the latest
 * arguments).
 */

export class ResponseSequencer {
  private nextSeq = 0;
  private lastAccepted = -1;

  issue(): number {
    return this.nextSeq++;
  }

  /** True when the response for `seq` is still the newest one seen. */
  accept(seq: number): boolean {
    if (seq <= this.lastAccepted) {
      return false;
    }
    this.lastAccepted = seq;
    return true;
  }
}

export type Scheduler = (fn: () => void, delayMs: number) => void;

export interface RateLimiterOptions {
  minIntervalMs: number;
  now?: () => number;
  schedule?: Scheduler;
}

/**
 * Leading-edge throttle with a trailing call: immediate when idle,
 * otherwise coalesces to one call per interval using the latest thunk.
 */
export class RateLimiter {
  private readonly minIntervalMs: number;
  private readonly now: () => number;
  private readonly schedule: Scheduler;
  private lastFire = -Infinity;
  private pending: (() => void) | null = null;
  private timerArmed = false;

  constructor(options: RateLimiterOptions) {
    this.minIntervalMs = options.minIntervalMs;
    this.now = options.now ?? (() => Date.now());
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  request(fn: () => void): void {
    const elapsed = this.now() - this.lastFire;
    if (elapsed >= this.minIntervalMs && !this.timerArmed) {
      this.lastFire = this.now();
      fn();
      return;
    }
    this.pending = fn;
    if (!this.timerArmed) {
      this.timerArmed = true;
      const wait = Math.max(0, this.minIntervalMs - elapsed);
      this.schedule(() => this.flush(), wait);
    }
  }

  private flush(): void {
    this.timerArmed = false;
    const fn = this.pending;
    this.pending = null;
    if (fn) {
      this.lastFire = this.now();
      fn();
    }
  }
}
