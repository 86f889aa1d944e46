/** DOM bootstrap: controls, canvases, drag-to-place manual neighbors. */

import { ProbeApi } from "./api.js";
import { ProbeSession } from "./session.js";
import { decodeFragment, encodeFragment, factorString, parseFactorString } from "./state.js";
import type { CaseGeometry, PredictResponse } from "./types.js";
import { drawScene, sceneBounds, ViewTransform } from "./view.js";

const WIDTH = 640;
const HEIGHT = 640;

function el<K extends keyof HTMLElementTagNameMap>(tag: K, attrs: Record<string, string> = {}, text = ""): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function currentTransform(geometry: CaseGeometry, response: PredictResponse | null): ViewTransform {
  return ViewTransform.fit(sceneBounds(geometry, response), WIDTH, HEIGHT);
}

export function boot(root: HTMLElement, apiBase = ""): ProbeSession {
  const api = new ProbeApi(apiBase);

  const controls = el("div", { class: "controls" });
  const caseSelect = el("select", { title: "case" });
  const kInput = el("input", { type: "number", min: "1", max: "50", value: "1", title: "K samples" });
  const seedInput = el("input", { type: "number", value: "0", title: "seed" });
  const partitionSelect = el("select", { title: "sector count" });
  partitionSelect.append(el("option", { value: "" }, "model default"));
  for (let n = 1; n <= 8; n++) {
    partitionSelect.append(el("option", { value: String(n) }, `${n} sectors`));
  }
  const factorBoxes: Record<string, HTMLInputElement> = {};
  const factorWrap = el("span", { class: "factors" });
  for (const code of ["v", "d", "r", "m"] as const) {
    const box = el("input", { type: "checkbox", id: `factor-${code}` });
    factorBoxes[code] = box;
    factorWrap.append(box, el("label", { for: `factor-${code}` }, code.toUpperCase()));
  }
  const factorsOn = el("input", { type: "checkbox", id: "factors-on", title: "override factors" });
  const compareBox = el("input", { type: "checkbox", id: "compare" });
  const clearButton = el("button", {}, "clear manual neighbors");
  const status = el("div", { class: "status" });

  controls.append(
    el("label", {}, "case "), caseSelect,
    el("label", {}, " K "), kInput,
    el("label", {}, " seed "), seedInput,
    el("label", {}, " sectors "), partitionSelect,
    el("label", { for: "factors-on" }, " mask factors "), factorsOn, factorWrap,
    el("label", { for: "compare" }, " compare "), compareBox,
    clearButton,
  );

  const panels = el("div", { class: "panels" });
  const mainCanvas = el("canvas", { width: String(WIDTH), height: String(HEIGHT) });
  const baselineCanvas = el("canvas", { width: String(WIDTH), height: String(HEIGHT), class: "hidden" });
  panels.append(mainCanvas, baselineCanvas);
  root.append(controls, panels, status);

  const mainCtx = mainCanvas.getContext("2d")!;
  const baselineCtx = baselineCanvas.getContext("2d")!;

  let transform: ViewTransform | null = null;

  function render(): void {
    const geometry = session.geometry;
    if (!geometry) {
      return;
    }
    transform = currentTransform(geometry, session.lastResponse);
    drawScene(mainCtx, WIDTH, HEIGHT, { geometry, response: session.lastResponse, showWheel: true }, transform);
    if (session.state.compare && session.lastBaseline) {
      baselineCanvas.classList.remove("hidden");
      drawScene(baselineCtx, WIDTH, HEIGHT, { geometry, response: session.lastBaseline, showWheel: true }, transform);
    } else {
      baselineCanvas.classList.add("hidden");
    }
  }

  const session = new ProbeSession(api, {
    onGeometry: () => render(),
    onResponse: () => {
      status.textContent = "";
      render();
    },
    onBaselineResponse: () => render(),
    onError: (message) => {
      status.textContent = `service error: ${message}`;
    },
    onState: (state) => {
      const fragment = encodeFragment(state);
      if (window.location.hash.replace(/^#/, "") !== fragment) {
        history.replaceState(null, "", `#${fragment}`);
      }
      kInput.value = String(state.k);
      seedInput.value = String(state.seed);
      partitionSelect.value = state.nPartitions === null ? "" : String(state.nPartitions);
      factorsOn.checked = state.factors !== null;
      if (state.factors) {
        const codes = factorString(state.factors);
        for (const code of ["v", "d", "r", "m"]) {
          factorBoxes[code].checked = codes.includes(code);
        }
      }
      compareBox.checked = state.compare;
    },
  });

  caseSelect.addEventListener("change", () => {
    session.loadCase(caseSelect.value).catch((err) => {
      status.textContent = `cannot load case: ${err}`;
    });
  });
  kInput.addEventListener("change", () => session.update({ k: Math.max(1, Number(kInput.value)) }));
  seedInput.addEventListener("change", () => session.update({ seed: Number(seedInput.value) }));
  partitionSelect.addEventListener("change", () => {
    session.update({ nPartitions: partitionSelect.value === "" ? null : Number(partitionSelect.value) });
  });
  const factorChange = () => {
    if (!factorsOn.checked) {
      session.update({ factors: null });
      return;
    }
    session.update({
      factors: parseFactorString(
        (["v", "d", "r", "m"] as const).filter((c) => factorBoxes[c].checked).join(""),
      ),
    });
  };
  factorsOn.addEventListener("change", factorChange);
  Object.values(factorBoxes).forEach((box) => box.addEventListener("change", factorChange));
  compareBox.addEventListener("change", () => session.update({ compare: compareBox.checked }));
  clearButton.addEventListener("click", () => session.clearManualNeighbors());

  // drag start = manual neighbor start point, release = end point
  let dragStart: [number, number] | null = null;
  mainCanvas.addEventListener("mousedown", (ev) => {
    if (!transform) {
      return;
    }
    const rect = mainCanvas.getBoundingClientRect();
    dragStart = transform.screenToWorld([ev.clientX - rect.left, ev.clientY - rect.top]);
  });
  mainCanvas.addEventListener("mouseup", (ev) => {
    if (!transform || !dragStart) {
      return;
    }
    const rect = mainCanvas.getBoundingClientRect();
    const dragEnd = transform.screenToWorld([ev.clientX - rect.left, ev.clientY - rect.top]);
    session.addManualNeighbor(dragStart, dragEnd);
    dragStart = null;
  });

  api
    .scenes()
    .then((listing) => {
      for (const scene of listing.scenes) {
        for (const caseId of scene.case_ids) {
          caseSelect.append(el("option", { value: caseId }, caseId));
        }
      }
      const fromHash = window.location.hash.length > 1 ? decodeFragment(window.location.hash) : null;
      if (fromHash && fromHash.caseId) {
        caseSelect.value = fromHash.caseId;
        return session.restore(fromHash);
      }
      const first = caseSelect.querySelector("option")?.getAttribute("value");
      if (first) {
        caseSelect.value = first;
        return session.loadCase(first);
      }
      return undefined;
    })
    .catch((err) => {
      status.textContent = `cannot reach service: ${err}`;
    });

  return session;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  boot(document.getElementById("app")!, params.get("api") ?? "");
}
