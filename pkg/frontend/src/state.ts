/** Dashboard controller: owns the selection, the active dataset and the view
 * parameters, and talks to the service. DOM code subscribes to the render
 * callbacks; all logic here is head-less and unit-tested.
 *
 * Volume controls never recompute a dataset: moving the slice or onion
 * slider only issues the corresponding fetch, and a per-control sequence
 * number discards responses that arrive out of order.
 */

import {
  ApiClient,
  CatalogEntry,
  DatasetMeta,
  EfficientPoints,
  ObjectivePayload,
  OnionPayload,
  ViewPayload,
} from "./api.js";
import {
  FieldState,
  buildFields,
  costWarning,
  defaultResolution,
  toComputeRequest,
  validateFields,
} from "./form.js";

export type Status =
  | { kind: "idle" }
  | { kind: "computing"; id: string }
  | { kind: "ready"; id: string }
  | { kind: "error"; message: string };

export interface Renderers {
  status?: (status: Status) => void;
  decision?: (view: ViewPayload, points: EfficientPoints | null) => void;
  objective?: (payload: ObjectivePayload) => void;
  shell?: (payload: OnionPayload) => void;
}

export class Dashboard {
  catalog: CatalogEntry[] = [];
  entry: CatalogEntry | null = null;
  fields: FieldState[] = [];
  resolution: number[] = [];
  methods: string[] = ["heatmap", "plot"];
  force = false;

  status: Status = { kind: "idle" };
  meta: DatasetMeta | null = null;
  method = "plot";
  sliceAxis = 3; // x3 by default
  sliceIndex = 0;
  onionThreshold = 0;

  private sliceSeq = 0;
  private onionSeq = 0;

  constructor(private api: ApiClient, private render: Renderers = {},
              private pollMs = 250) {}

  async loadCatalog(): Promise<CatalogEntry[]> {
    this.catalog = await this.api.catalog();
    return this.catalog;
  }

  selectProblem(id: string): void {
    const entry = this.catalog.find((e) => e.id === id);
    if (!entry) throw new Error(`unknown problem ${id}`);
    this.entry = entry;
    this.fields = buildFields(entry);
    this.resolution = defaultResolution(entry);
    this.sliceAxis = 3;
  }

  validationErrors(): string[] {
    if (!this.entry) return ["no problem selected"];
    return validateFields(this.fields, this.resolution, this.entry.p);
  }

  warning(): { text: string; needsForce: boolean } | null {
    if (!this.entry) return null;
    return costWarning(this.entry, this.resolution, this.methods);
  }

  private setStatus(status: Status): void {
    this.status = status;
    this.render.status?.(status);
  }

  /** Submit the compute request, poll to completion, show the first view. */
  async generate(): Promise<void> {
    if (!this.entry) throw new Error("no problem selected");
    const errors = this.validationErrors();
    if (errors.length) throw new Error(errors.join("; "));
    const request = toComputeRequest(this.entry, this.fields, this.resolution,
                                     this.methods, this.force);
    const job = await this.api.compute(request);
    this.setStatus({ kind: "computing", id: job.id });
    await this.api.waitReady(job.id, this.pollMs);
    this.meta = await this.api.meta(job.id);
    this.method = this.meta.methods.includes("plot") ? "plot" : this.meta.methods[0];
    if (this.meta.p === 3) {
      this.sliceIndex = Math.floor(this.meta.resolution[this.sliceAxis - 1] / 2);
      if (this.meta.onion) this.onionThreshold = this.meta.onion.high;
    }
    this.setStatus({ kind: "ready", id: job.id });
    await this.refreshView();
  }

  get efficientPoints(): EfficientPoints | null {
    return this.meta?.efficient ?? null;
  }

  private slice(): { axis: number; index: number } | undefined {
    if (!this.meta || this.meta.p !== 3) return undefined;
    return { axis: this.sliceAxis, index: this.sliceIndex };
  }

  /** Fetch the active method's decision-space view plus the objective view. */
  async refreshView(): Promise<void> {
    if (!this.meta) return;
    const view = await this.api.view(this.meta.id, this.method, this.slice());
    this.render.decision?.(view, this.efficientPoints);
    const objective = await this.api.objectiveSpace(this.meta.id, this.method);
    this.render.objective?.(objective);
  }

  async setMethod(method: string): Promise<void> {
    if (!this.meta) return;
    if (!this.meta.methods.includes(method)) {
      throw new Error(`${method} was not computed for this dataset`);
    }
    this.method = method;
    await this.refreshView();
  }

  /** Slice slider: fetches only the new plane; efficient points stay put. */
  async setSliceIndex(index: number): Promise<void> {
    if (!this.meta || this.meta.p !== 3) return;
    this.sliceIndex = index;
    const seq = ++this.sliceSeq;
    const view = await this.api.view(this.meta.id, this.method,
                                     { axis: this.sliceAxis, index });
    if (seq !== this.sliceSeq) return; // a newer slider position superseded this
    this.render.decision?.(view, this.efficientPoints);
  }

  async setSliceAxis(axis: number): Promise<void> {
    if (!this.meta || this.meta.p !== 3) return;
    this.sliceAxis = axis;
    const n = this.meta.resolution[axis - 1];
    await this.setSliceIndex(Math.min(this.sliceIndex, n - 1));
  }

  /** Onion slider: fetches only the shell at the new threshold. */
  async setOnionThreshold(threshold: number): Promise<void> {
    if (!this.meta || this.meta.p !== 3) return;
    this.onionThreshold = threshold;
    const seq = ++this.onionSeq;
    const shell = await this.api.onion(this.meta.id, threshold);
    if (seq !== this.onionSeq) return;
    this.render.shell?.(shell);
  }
}
