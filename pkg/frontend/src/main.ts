/** DOM wiring for the dashboard. All logic lives in the tested modules;
 * this file only builds elements and forwards events. */

import { ApiClient, EfficientPoints, ObjectivePayload, OnionPayload,
         ViewPayload, decodeF64, decodeU8 } from "./api.js";
import { Dashboard, Status } from "./state.js";
import { Viewport, fitViewport, imageToCanvas, panBy,
         pointToPixel, rgbToRgba, zoomAt } from "./render2d.js";
import { Camera, drawOrder, glyphSize, project, rotate } from "./render3d.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const api = new ApiClient((url, init) => fetch(url, init));
const dashboard = new Dashboard(api, {
  status: showStatus,
  decision: drawDecision,
  objective: drawObjective,
  shell: drawShell,
});

interface Pane {
  canvas: HTMLCanvasElement;
  viewport: Viewport;
  image: ImageData | null;
  overlay: (() => void) | null;
}

function pane(id: string): Pane {
  return { canvas: $(id), viewport: { scale: 1, offsetX: 0, offsetY: 0 },
           image: null, overlay: null };
}

let decisionPane: Pane;
let objectivePane: Pane;
let volumeCamera: Camera = { yaw: 0.7, pitch: 0.5, scale: 120, cx: 220, cy: 220 };
let lastShell: OnionPayload | null = null;

function repaint(p: Pane): void {
  const ctx = p.canvas.getContext("2d")!;
  ctx.fillStyle = "#14141c";
  ctx.fillRect(0, 0, p.canvas.width, p.canvas.height);
  if (!p.image) return;
  ctx.imageSmoothingEnabled = false;
  const off = document.createElement("canvas");
  off.width = p.image.width;
  off.height = p.image.height;
  off.getContext("2d")!.putImageData(p.image, 0, 0);
  ctx.save();
  ctx.translate(p.viewport.offsetX, p.viewport.offsetY);
  ctx.scale(p.viewport.scale, p.viewport.scale);
  ctx.drawImage(off, 0, 0);
  ctx.restore();
  p.overlay?.();
}

function attachZoomPan(p: Pane): void {
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  p.canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    const rect = p.canvas.getBoundingClientRect();
    const factor = event.deltaY < 0 ? 1.2 : 1 / 1.2;
    p.viewport = zoomAt(p.viewport, factor,
                        event.clientX - rect.left, event.clientY - rect.top);
    repaint(p);
  });
  p.canvas.addEventListener("pointerdown", (event) => {
    dragging = true;
    lastX = event.clientX;
    lastY = event.clientY;
    p.canvas.setPointerCapture(event.pointerId);
  });
  p.canvas.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    p.viewport = panBy(p.viewport, event.clientX - lastX, event.clientY - lastY);
    lastX = event.clientX;
    lastY = event.clientY;
    repaint(p);
  });
  p.canvas.addEventListener("pointerup", () => { dragging = false; });
}

function showStatus(status: Status): void {
  const label = $("status");
  if (status.kind === "computing") {
    label.textContent = `computing dataset ${status.id} ...`;
  } else if (status.kind === "ready") {
    label.textContent = `dataset ${status.id} ready`;
    updateExports(status.id);
  } else if (status.kind === "error") {
    label.textContent = status.message;
  } else {
    label.textContent = "";
  }
}

function drawDecision(view: ViewPayload, points: EfficientPoints | null): void {
  const rgba = rgbToRgba(decodeU8(view.rgb_b64), view.width, view.height);
  const image = new ImageData(view.width, view.height);
  image.data.set(rgba);
  decisionPane.image = image;
  decisionPane.viewport = fitViewport(view.width, view.height,
                                      decisionPane.canvas.width,
                                      decisionPane.canvas.height);
  const meta = dashboard.meta!;
  decisionPane.overlay = () => {
    const ctx = decisionPane.canvas.getContext("2d")!;
    if (view.plane_coord !== undefined) {
      ctx.fillStyle = "#9aa";
      ctx.font = "12px sans-serif";
      ctx.fillText(`axis ${view.axis} = ${view.plane_coord!.toFixed(3)}`, 8, 16);
    }
    if (!points || meta.p !== 2 || dashboard.method !== "plot") return;
    // for 2D PLOT the service already colors efficient pixels; draw markers
    // on top so isolated cells stay visible when zoomed out
    const positions = decodeF64(points.positions_b64);
    const colors = decodeU8(points.rgb_b64);
    for (let i = 0; i < points.cells.length; i++) {
      const [px, py] = pointToPixel(positions[i * 2], positions[i * 2 + 1],
                                    meta.lower, meta.upper,
                                    view.width, view.height);
      const [cx, cy] = imageToCanvas(decisionPane.viewport, px, py);
      ctx.fillStyle = `rgb(${colors[i * 3]},${colors[i * 3 + 1]},${colors[i * 3 + 2]})`;
      ctx.fillRect(cx - 1, cy - 1, 2, 2);
    }
  };
  repaint(decisionPane);
  if (meta.p === 3) drawVolume();
}

function drawObjective(payload: ObjectivePayload): void {
  const points = decodeF64(payload.points_b64);
  const colors = decodeU8(payload.rgb_b64);
  const n = payload.count;
  const canvas = objectivePane.canvas;
  const ctx = canvas.getContext("2d")!;
  ctx.fillStyle = "#14141c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  let lo1 = Infinity, hi1 = -Infinity, lo2 = Infinity, hi2 = -Infinity;
  for (let i = 0; i < n; i++) {
    lo1 = Math.min(lo1, points[i * payload.k]);
    hi1 = Math.max(hi1, points[i * payload.k]);
    lo2 = Math.min(lo2, points[i * payload.k + 1]);
    hi2 = Math.max(hi2, points[i * payload.k + 1]);
  }
  const vp = objectivePane.viewport;
  for (let i = 0; i < n; i++) {
    const f1 = (points[i * payload.k] - lo1) / (hi1 - lo1 || 1);
    const f2 = (points[i * payload.k + 1] - lo2) / (hi2 - lo2 || 1);
    const [cx, cy] = imageToCanvas(vp, f1 * canvas.width, (1 - f2) * canvas.height);
    ctx.fillStyle = `rgb(${colors[i * 3]},${colors[i * 3 + 1]},${colors[i * 3 + 2]})`;
    ctx.fillRect(cx, cy, 2, 2);
  }
}

function drawShell(payload: OnionPayload): void {
  lastShell = payload;
  drawVolume();
}

function drawVolume(): void {
  const meta = dashboard.meta;
  const canvas = $<HTMLCanvasElement>("volume");
  const ctx = canvas.getContext("2d")!;
  ctx.fillStyle = "#14141c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!meta || meta.p !== 3) return;
  const center = meta.lower.map((lo, i) => (lo + meta.upper[i]) / 2);
  if (lastShell) {
    const positions = decodeF64(lastShell.positions_b64);
    const proj = project(volumeCamera, positions, center);
    const size = glyphSize(volumeCamera,
                           (meta.upper[0] - meta.lower[0]) / meta.resolution[0] / 2);
    ctx.fillStyle = "rgba(120,140,200,0.25)";
    for (const i of drawOrder(proj.depth)) {
      ctx.fillRect(proj.x[i] - size / 2, proj.y[i] - size / 2, size, size);
    }
  }
  const points = dashboard.efficientPoints;
  if (points) {
    // efficient points stay visible at every slice position and threshold
    const positions = decodeF64(points.positions_b64);
    const colors = decodeU8(points.rgb_b64);
    const proj = project(volumeCamera, positions, center);
    for (const i of drawOrder(proj.depth)) {
      ctx.fillStyle = `rgb(${colors[i * 3]},${colors[i * 3 + 1]},${colors[i * 3 + 2]})`;
      ctx.fillRect(proj.x[i] - 2, proj.y[i] - 2, 4, 4);
    }
  }
}

function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number) {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    clearTimeout(handle);
    handle = setTimeout(() => fn(...args), ms);
  };
}

function updateExports(id: string): void {
  const exports = $("exports");
  exports.innerHTML = "";
  const meta = dashboard.meta;
  const slice = meta && meta.p === 3
    ? { axis: dashboard.sliceAxis, index: dashboard.sliceIndex } : undefined;
  for (const name of ["plot.ppm", "heatmap.ppm", "cost.ppm", "heatmap.mopf",
                      "objectives.mopf"]) {
    const link = document.createElement("a");
    link.href = api.exportUrl(id, name, name.endsWith(".ppm") ? slice : undefined);
    link.textContent = name;
    link.setAttribute("download", name);
    exports.appendChild(link);
  }
}

function rebuildForm(): void {
  const entry = dashboard.entry!;
  const holder = $("params");
  holder.innerHTML = "";
  for (const field of dashboard.fields) {
    const row = document.createElement("div");
    row.className = "param-row";
    const label = document.createElement("label");
    label.textContent = field.name;
    label.title = field.doc ?? "";
    row.appendChild(label);
    field.values.forEach((value, i) => {
      const input = document.createElement("input");
      input.type = "number";
      input.step = "any";
      input.value = String(value);
      input.addEventListener("input", () => {
        field.values[i] = Number(input.value);
        showErrors();
      });
      row.appendChild(input);
    });
    holder.appendChild(row);
  }
  const res = $<HTMLInputElement>("resolution");
  res.value = dashboard.resolution.join(",");
  $("volume-controls").style.display = entry.p === 3 ? "block" : "none";
  showErrors();
}

function showErrors(): void {
  const errors = dashboard.validationErrors();
  $("errors").textContent = errors.join(" | ");
  $<HTMLButtonElement>("generate").disabled = errors.length > 0;
  const warning = dashboard.warning();
  $("cost-warning").textContent = warning
    ? warning.text + (warning.needsForce ? " Requires force for this size." : "")
    : "";
}

async function init(): Promise<void> {
  decisionPane = pane("decision");
  objectivePane = pane("objective");
  attachZoomPan(decisionPane);
  attachZoomPan(objectivePane);

  const catalog = await dashboard.loadCatalog();
  const select = $<HTMLSelectElement>("problem");
  for (const entry of catalog) {
    const option = document.createElement("option");
    option.value = entry.id;
    option.textContent = `${entry.id} (p=${entry.p}, k=${entry.k})`;
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    dashboard.selectProblem(select.value);
    rebuildForm();
  });
  dashboard.selectProblem(catalog[0].id);
  rebuildForm();

  $<HTMLInputElement>("resolution").addEventListener("input", (event) => {
    const raw = (event.target as HTMLInputElement).value;
    dashboard.resolution = raw.split(",").map((v) => Number(v.trim()));
    showErrors();
  });
  for (const method of ["heatmap", "plot", "cost"]) {
    $<HTMLInputElement>(`method-${method}`).addEventListener("change", (event) => {
      const checked = (event.target as HTMLInputElement).checked;
      dashboard.methods = dashboard.methods.filter((m) => m !== method);
      if (checked) dashboard.methods.push(method);
      showErrors();
    });
  }
  $<HTMLInputElement>("force").addEventListener("change", (event) => {
    dashboard.force = (event.target as HTMLInputElement).checked;
  });

  $("generate").addEventListener("click", async () => {
    try {
      await dashboard.generate();
      const meta = dashboard.meta!;
      for (const method of ["heatmap", "plot", "cost"]) {
        $<HTMLButtonElement>(`view-${method}`).disabled =
          !meta.methods.includes(method);
      }
      if (meta.p === 3) {
        const slider = $<HTMLInputElement>("slice-index");
        slider.max = String(meta.resolution[dashboard.sliceAxis - 1] - 1);
        slider.value = String(dashboard.sliceIndex);
        if (meta.onion) {
          const onion = $<HTMLInputElement>("onion-threshold");
          onion.min = String(meta.onion.low);
          onion.max = String(meta.onion.high);
          onion.step = String((meta.onion.high - meta.onion.low) / 200 || 1);
          onion.value = String(dashboard.onionThreshold);
          await dashboard.setOnionThreshold(dashboard.onionThreshold);
        }
      }
    } catch (error) {
      showStatus({ kind: "error", message: String(error) });
    }
  });

  for (const method of ["heatmap", "plot", "cost"]) {
    $(`view-${method}`).addEventListener("click", () => {
      dashboard.setMethod(method).catch((error) =>
        showStatus({ kind: "error", message: String(error) }));
    });
  }

  for (const tab of ["decision-tab", "objective-tab", "joint-tab"]) {
    $(tab).addEventListener("click", () => {
      $("panes").className = tab;
    });
  }

  const sliceSlider = $<HTMLInputElement>("slice-index");
  sliceSlider.addEventListener("input", debounce(() => {
    dashboard.setSliceIndex(Number(sliceSlider.value));
  }, 80));
  $<HTMLSelectElement>("slice-axis").addEventListener("change", (event) => {
    const axis = Number((event.target as HTMLSelectElement).value);
    dashboard.setSliceAxis(axis).then(() => {
      const meta = dashboard.meta;
      if (meta) sliceSlider.max = String(meta.resolution[axis - 1] - 1);
    });
  });
  const onionSlider = $<HTMLInputElement>("onion-threshold");
  onionSlider.addEventListener("input", debounce(() => {
    dashboard.setOnionThreshold(Number(onionSlider.value));
  }, 80));
  const volume = $<HTMLCanvasElement>("volume");
  let rotating = false;
  let lastX = 0;
  let lastY = 0;
  volume.addEventListener("pointerdown", (event) => {
    rotating = true;
    lastX = event.clientX;
    lastY = event.clientY;
  });
  volume.addEventListener("pointermove", (event) => {
    if (!rotating) return;
    volumeCamera = rotate(volumeCamera, (event.clientX - lastX) * 0.01,
                          (event.clientY - lastY) * 0.01);
    lastX = event.clientX;
    lastY = event.clientY;
    drawVolume();
  });
  volume.addEventListener("pointerup", () => { rotating = false; });
}

init().catch((error) => showStatus({ kind: "error", message: String(error) }));
