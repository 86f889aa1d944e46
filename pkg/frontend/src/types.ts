/** Wire types mirroring the probe service JSON. */

export type Point = [number, number];

export interface ManualSpec {
  start: Point;
  end: Point;
}

export interface NeighborPolyline {
  id: string;
  tag: "real" | "manual";
  points: number[][];
}

export interface CaseGeometry {
  case_id: string;
  scene_id: string;
  unit: string;
  t_h: number;
  t_f: number;
  observed: number[][];
  future: number[][] | null;
  neighbors: NeighborPolyline[];
}

export interface SceneListing {
  scenes: { scene_id: string; case_ids: string[] }[];
}

export interface PredictRequestBody {
  case_id: string;
  manual_neighbors: { start: number[]; end: number[] }[];
  k: number;
  seed: number;
  n_partitions?: number;
  factors?: string;
}

export interface AttentionProfile {
  raw: number[];
  normalized: number[];
}

export interface PredictResponse {
  case_id: string;
  scene_id: string;
  unit: string;
  k: number;
  seed: number;
  n_partitions: number;
  factors: string[];
  observed: number[][];
  neighbors: NeighborPolyline[];
  predictions: number[][][];
  partition_boundaries: [number, number][];
  attention: AttentionProfile | null;
  meta: { values: number[][]; counts: number[]; factors: string[] } | null;
  checkpoint_checksum?: string;
}

export interface ModelInfo {
  loaded: boolean;
  checksum?: string;
  path?: string;
  config?: Record<string, unknown>;
}
