/** Test doubles: a recording 2D context and a scripted fetch. */

import type { Draw2D } from "../src/view.js";
import type { FetchLike } from "../src/api.js";
import type { CaseGeometry, PredictRequestBody, PredictResponse } from "../src/types.js";

export interface RecordedPolyline {
  style: string;
  points: [number, number][];
}

/** Captures stroked paths so tests can compare screen coordinates. */
export class RecordingContext implements Draw2D {
  strokeStyle: string | CanvasGradient | CanvasPattern = "#000";
  fillStyle: string | CanvasGradient | CanvasPattern = "#000";
  lineWidth = 1;
  globalAlpha = 1;
  font = "";

  polylines: RecordedPolyline[] = [];
  sectors = 0;
  clears = 0;
  log: string[] = [];

  private path: [number, number][] = [];
  private pathHasArc = false;

  clearRect(): void {
    this.clears += 1;
    this.log.push("clear");
  }

  beginPath(): void {
    this.path = [];
    this.pathHasArc = false;
  }

  moveTo(x: number, y: number): void {
    this.path.push([x, y]);
  }

  lineTo(x: number, y: number): void {
    this.path.push([x, y]);
  }

  arc(): void {
    this.pathHasArc = true;
  }

  closePath(): void {}

  stroke(): void {
    if (this.path.length > 1) {
      this.polylines.push({ style: String(this.strokeStyle), points: [...this.path] });
      this.log.push(`stroke:${this.path.length}`);
    }
  }

  fill(): void {
    if (this.pathHasArc) {
      this.sectors += 1;
    }
    this.log.push("fill");
  }

  setLineDash(): void {}

  fillText(): void {}
}

export interface LoggedRequest {
  url: string;
  method: string;
  body: unknown;
}

/** A fetch double that serves canned payloads and logs every request. */
export class FakeService {
  requests: LoggedRequest[] = [];
  geometries = new Map<string, CaseGeometry>();
  predict: (body: PredictRequestBody) => PredictResponse | { status: number; detail: unknown };

  constructor(predict: FakeService["predict"]) {
    this.predict = predict;
  }

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    this.requests.push({ url, method, body });
    if (method === "GET" && url.startsWith("/cases/")) {
      const id = decodeURIComponent(url.slice("/cases/".length));
      const geometry = this.geometries.get(id);
      if (!geometry) {
        return jsonResponse(404, { detail: [{ loc: ["path"], msg: "unknown case" }] });
      }
      return jsonResponse(200, geometry);
    }
    if (method === "GET" && url === "/scenes") {
      const ids = [...this.geometries.keys()];
      return jsonResponse(200, { scenes: [{ scene_id: "test", case_ids: ids }] });
    }
    if (method === "POST" && url === "/predict") {
      const out = this.predict(body as PredictRequestBody);
      if ("status" in out && typeof out.status === "number" && "detail" in out) {
        return jsonResponse(out.status, { detail: out.detail });
      }
      return jsonResponse(200, out);
    }
    return jsonResponse(404, { detail: "unknown route" });
  };

  predictBodies(): PredictRequestBody[] {
    return this.requests
      .filter((r) => r.url === "/predict")
      .map((r) => r.body as PredictRequestBody);
  }
}

function jsonResponse(status: number, payload: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
  } as unknown as Response;
}

/** A small fixed case; coordinates chosen to be easy to eyeball. */
export function sampleGeometry(caseId = "test:a0@0"): CaseGeometry {
  const observed = Array.from({ length: 8 }, (_, i) => [i * 0.4 - 2.8, 0.0]);
  const future = Array.from({ length: 12 }, (_, i) => [(i + 1) * 0.4, 0.0]);
  const neighbor = Array.from({ length: 8 }, (_, i) => [i * 0.3, 1.5]);
  return {
    case_id: caseId,
    scene_id: "test",
    unit: "meters",
    t_h: 8,
    t_f: 12,
    observed,
    future,
    neighbors: [{ id: "n0", tag: "real", points: neighbor }],
  };
}

/** Build a service-shaped /predict response for a request. */
export function cannedResponse(body: PredictRequestBody, geometry: CaseGeometry): PredictResponse {
  const n = body.n_partitions ?? 8;
  const width = (2 * Math.PI) / n;
  const boundaries: [number, number][] = Array.from({ length: n }, (_, i) => [
    i * width,
    (i + 1) * width,
  ]);
  const manuals = body.manual_neighbors.map((m, j) => ({
    id: `manual-${j}`,
    tag: "manual" as const,
    points: interpolate(m.start, m.end, geometry.t_h),
  }));
  // predictions fan out from the last observed point; purely synthetic but
  // unique per (k, n_partitions, manual count) so stale renders are caught
  const anchor = geometry.observed[geometry.observed.length - 1];
  const predictions = Array.from({ length: body.k }, (_, k) =>
    Array.from({ length: geometry.t_f }, (_, step) => [
      anchor[0] + 0.4 * (step + 1),
      anchor[1] + 0.05 * (k + 1) * (step + 1) + 0.01 * n + 0.2 * manuals.length,
    ]),
  );
  const raw = Array.from({ length: n }, (_, i) => (i + 1) * 1.0 + manuals.length);
  const total = raw.reduce((a, b) => a + b, 0);
  return {
    case_id: body.case_id,
    scene_id: geometry.scene_id,
    unit: geometry.unit,
    k: body.k,
    seed: body.seed,
    n_partitions: n,
    factors: ["velocity", "distance", "direction"],
    observed: geometry.observed,
    neighbors: [...geometry.neighbors, ...manuals],
    predictions,
    partition_boundaries: boundaries,
    attention: { raw, normalized: raw.map((v) => v / total) },
    meta: null,
    checkpoint_checksum: "test",
  };
}

function interpolate(start: number[], end: number[], steps: number): number[][] {
  return Array.from({ length: steps }, (_, i) => {
    const t = steps === 1 ? 0 : i / (steps - 1);
    return [start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])];
  });
}
