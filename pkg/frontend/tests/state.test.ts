import { describe, expect, it } from "vitest";

import {
  decodeFragment,
  encodeFragment,
  factorString,
  initialState,
  parseFactorString,
  toPredictRequest,
} from "../src/state.js";

describe("toPredictRequest", () => {
  it("omits unset overrides", () => {
    const state = initialState("scene:a@0");
    expect(toPredictRequest(state)).toEqual({
      case_id: "scene:a@0",
      manual_neighbors: [],
      k: 1,
      seed: 0,
    });
  });

  it("includes overrides when set", () => {
    const state = initialState("c");
    state.k = 20;
    state.seed = 7;
    state.nPartitions = 4;
    state.factors = parseFactorString("vd");
    state.manuals = [{ start: [0, 0], end: [7, 0] }];
    expect(toPredictRequest(state)).toEqual({
      case_id: "c",
      manual_neighbors: [{ start: [0, 0], end: [7, 0] }],
      k: 20,
      seed: 7,
      n_partitions: 4,
      factors: "vd",
    });
  });

  it("can swap in a different manual set without mutating state", () => {
    const state = initialState("c");
    state.manuals = [{ start: [1, 2], end: [3, 4] }];
    const body = toPredictRequest(state, []);
    expect(body.manual_neighbors).toEqual([]);
    expect(state.manuals).toHaveLength(1);
  });
});

describe("factor strings", () => {
  it("round trips", () => {
    for (const s of ["v", "vd", "vdr", "vdrm", "dm", ""]) {
      expect(factorString(parseFactorString(s))).toBe(s);
    }
  });
});

describe("URL fragment", () => {
  it("round trips the full state", () => {
    const state = initialState("scene:a@12");
    state.k = 5;
    state.seed = 42;
    state.nPartitions = 2;
    state.factors = parseFactorString("vdr");
    state.compare = true;
    state.manuals = [
      { start: [0, 0], end: [7, 0] },
      { start: [-1.5, 2.25], end: [-1.5, 2.25] },
    ];
    const restored = decodeFragment(encodeFragment(state));
    expect(restored).toEqual(state);
  });

  it("defaults survive an empty fragment", () => {
    const restored = decodeFragment("");
    expect(restored).toEqual(initialState(""));
  });

  it("tolerates a leading hash", () => {
    const state = initialState("c");
    state.k = 3;
    expect(decodeFragment("#" + encodeFragment(state))).toEqual(state);
  });

  it("rejects malformed manual specs", () => {
    expect(() => decodeFragment("case=c&mn=1,2")).toThrow();
    expect(() => decodeFragment("case=c&mn=a,b:c,d")).toThrow();
  });
});
