/** Thin typed client for the probe service. */

import type {
  CaseGeometry,
  ModelInfo,
  PredictRequestBody,
  PredictResponse,
  SceneListing,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`service error ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ProbeApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    return this.unwrap<T>(resp);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.unwrap<T>(resp);
  }

  private async unwrap<T>(resp: Response): Promise<T> {
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, (payload as { detail?: unknown }).detail ?? payload);
    }
    return payload as T;
  }

  scenes(): Promise<SceneListing> {
    return this.get("/scenes");
  }

  caseGeometry(caseId: string): Promise<CaseGeometry> {
    return this.get(`/cases/${encodeURIComponent(caseId)}`);
  }

  predict(body: PredictRequestBody): Promise<PredictResponse> {
    return this.post("/predict", body);
  }

  model(): Promise<ModelInfo> {
    return this.get("/model");
  }

  loadModel(path: string): Promise<ModelInfo> {
    return this.post("/model/load", { path });
  }
}
