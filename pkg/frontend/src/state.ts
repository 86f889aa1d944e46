/**
 * Probe state and its two serializations: the /predict request body and
 * the shareable URL fragment.  The state is the single source of truth;
 * everything shown on screen comes from service responses to requests
 * derived from it.
 */

import type { ManualSpec, Point, PredictRequestBody } from "./types.js";

export interface FactorToggles {
  v: boolean;
  d: boolean;
  r: boolean;
  m: boolean;
}

export interface ProbeState {
  caseId: string;
  manuals: ManualSpec[];
  k: number;
  seed: number;
  /** null = use the checkpoint's partition count */
  nPartitions: number | null;
  /** null = use the checkpoint's factor set */
  factors: FactorToggles | null;
  compare: boolean;
}

export function initialState(caseId = ""): ProbeState {
  return { caseId, manuals: [], k: 1, seed: 0, nPartitions: null, factors: null, compare: false };
}

export function factorString(f: FactorToggles): string {
  return (f.v ? "v" : "") + (f.d ? "d" : "") + (f.r ? "r" : "") + (f.m ? "m" : "");
}

export function parseFactorString(s: string): FactorToggles {
  return { v: s.includes("v"), d: s.includes("d"), r: s.includes("r"), m: s.includes("m") };
}

/** The exact body POSTed to /predict; overrides are omitted when unset. */
export function toPredictRequest(state: ProbeState, manualsOverride?: ManualSpec[]): PredictRequestBody {
  const manuals = manualsOverride ?? state.manuals;
  const body: PredictRequestBody = {
    case_id: state.caseId,
    manual_neighbors: manuals.map((m) => ({ start: [...m.start], end: [...m.end] })),
    k: state.k,
    seed: state.seed,
  };
  if (state.nPartitions !== null) {
    body.n_partitions = state.nPartitions;
  }
  if (state.factors !== null) {
    body.factors = factorString(state.factors);
  }
  return body;
}

function formatNumber(x: number): string {
  return String(x);
}

function encodeManual(m: ManualSpec): string {
  return (
    `${formatNumber(m.start[0])},${formatNumber(m.start[1])}` +
    `:${formatNumber(m.end[0])},${formatNumber(m.end[1])}`
  );
}

function decodeManual(spec: string): ManualSpec {
  const [startPart, endPart] = spec.split(":");
  const parse = (part: string): Point => {
    const nums = part.split(",").map(Number);
    if (nums.length !== 2 || nums.some((v) => !Number.isFinite(v))) {
      throw new Error(`bad manual spec ${spec}`);
    }
    return [nums[0], nums[1]];
  };
  if (endPart === undefined) {
    throw new Error(`bad manual spec ${spec}`);
  }
  return { start: parse(startPart), end: parse(endPart) };
}

/** Everything needed to reconstruct the UI, as a URL fragment. */
export function encodeFragment(state: ProbeState): string {
  const params = new URLSearchParams();
  params.set("case", state.caseId);
  params.set("k", String(state.k));
  params.set("seed", String(state.seed));
  if (state.nPartitions !== null) {
    params.set("np", String(state.nPartitions));
  }
  if (state.factors !== null) {
    params.set("f", factorString(state.factors));
  }
  if (state.compare) {
    params.set("cmp", "1");
  }
  state.manuals.forEach((m) => params.append("mn", encodeManual(m)));
  return params.toString();
}

export function decodeFragment(fragment: string): ProbeState {
  const params = new URLSearchParams(fragment.replace(/^#/, ""));
  const state = initialState(params.get("case") ?? "");
  if (params.has("k")) {
    state.k = Math.max(1, Number(params.get("k")));
  }
  if (params.has("seed")) {
    state.seed = Number(params.get("seed"));
  }
  if (params.has("np")) {
    state.nPartitions = Number(params.get("np"));
  }
  const f = params.get("f");
  if (f !== null) {
    state.factors = parseFactorString(f);
  }
  state.compare = params.get("cmp") === "1";
  state.manuals = params.getAll("mn").map(decodeManual);
  return state;
}
