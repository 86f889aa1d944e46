/**
 * The probing session: holds the state, talks to the service, and hands
 * accepted responses to the renderer.  No numerical modeling happens
 * here; the session only forwards service responses.
 */

import { ProbeApi } from "./api.js";
import { RateLimiter } from "./net.js";
import { ResponseSequencer } from "./net.js";
import { initialState, toPredictRequest, type ProbeState } from "./state.js";
import type { CaseGeometry, ManualSpec, PredictResponse } from "./types.js";

export interface SessionHooks {
  onGeometry?(geometry: CaseGeometry): void;
  onResponse?(response: PredictResponse, state: ProbeState): void;
  onBaselineResponse?(response: PredictResponse | null): void;
  onError?(message: string): void;
  onState?(state: ProbeState): void;
}

export interface SessionOptions {
  /** interactive updates are capped at one request per interval */
  minIntervalMs?: number;
  now?: () => number;
  schedule?: (fn: () => void, delayMs: number) => void;
}

export class ProbeSession {
  state: ProbeState = initialState();
  geometry: CaseGeometry | null = null;
  lastResponse: PredictResponse | null = null;
  lastBaseline: PredictResponse | null = null;

  private readonly mainSeq = new ResponseSequencer();
  private readonly baselineSeq = new ResponseSequencer();
  private readonly limiter: RateLimiter;
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ProbeApi,
    private readonly hooks: SessionHooks = {},
    options: SessionOptions = {},
  ) {
    this.limiter = new RateLimiter({
      minIntervalMs: options.minIntervalMs ?? 100,
      now: options.now,
      schedule: options.schedule,
    });
  }

  /** Resolves when every request issued so far has settled. */
  settled(): Promise<void> {
    return this.inflight;
  }

  async loadCase(caseId: string): Promise<void> {
    this.state.caseId = caseId;
    this.state.manuals = [];
    this.geometry = await this.api.caseGeometry(caseId);
    this.lastResponse = null;
    this.lastBaseline = null;
    this.hooks.onGeometry?.(this.geometry);
    this.hooks.onState?.(this.state);
    this.issuePredict();
    return this.settled();
  }

  restore(state: ProbeState): Promise<void> {
    const caseId = state.caseId;
    this.state = { ...state, manuals: state.manuals.map((m) => ({ ...m })) };
    if (!caseId) {
      return Promise.resolve();
    }
    return this.api.caseGeometry(caseId).then((geometry) => {
      this.geometry = geometry;
      this.hooks.onGeometry?.(geometry);
      this.hooks.onState?.(this.state);
      this.issuePredict();
      return this.settled();
    });
  }

  update(patch: Partial<ProbeState>): void {
    Object.assign(this.state, patch);
    this.hooks.onState?.(this.state);
    this.schedulePredict();
  }

  addManualNeighbor(start: ManualSpec["start"], end: ManualSpec["end"]): void {
    this.state.manuals.push({ start: [...start] as ManualSpec["start"], end: [...end] as ManualSpec["end"] });
    this.hooks.onState?.(this.state);
    this.schedulePredict();
  }

  clearManualNeighbors(): void {
    this.state.manuals = [];
    this.hooks.onState?.(this.state);
    this.schedulePredict();
  }

  /** Rate-limited entry point used by every interactive mutation. */
  schedulePredict(): void {
    this.limiter.request(() => this.issuePredict());
  }

  private issuePredict(): void {
    if (!this.state.caseId) {
      return;
    }
    const body = toPredictRequest(this.state);
    const seq = this.mainSeq.issue();
    const main = this.api
      .predict(body)
      .then((response) => {
        if (this.mainSeq.accept(seq)) {
          this.lastResponse = response;
          this.hooks.onResponse?.(response, this.state);
        }
      })
      .catch((err: unknown) => {
        this.hooks.onError?.(err instanceof Error ? err.message : String(err));
      });

    let baseline: Promise<void> = Promise.resolve();
    if (this.state.compare) {
      // identical request with no manual neighbors, for side-by-side panels
      const baselineBody = toPredictRequest(this.state, []);
      const bseq = this.baselineSeq.issue();
      baseline = this.api
        .predict(baselineBody)
        .then((response) => {
          if (this.baselineSeq.accept(bseq)) {
            this.lastBaseline = response;
            this.hooks.onBaselineResponse?.(response);
          }
        })
        .catch((err: unknown) => {
          this.hooks.onError?.(err instanceof Error ? err.message : String(err));
        });
    } else if (this.lastBaseline !== null) {
      this.lastBaseline = null;
      this.hooks.onBaselineResponse?.(null);
    }
    this.inflight = this.inflight.then(() => Promise.all([main, baseline]).then(() => undefined));
  }
}
