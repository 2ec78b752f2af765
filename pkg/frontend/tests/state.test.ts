import { describe, expect, it } from "vitest";

import { ApiClient, EfficientPoints, ViewPayload } from "../src/api.js";
import { Dashboard } from "../src/state.js";
import { FakeService } from "./fake_service.js";

function makeDashboard(service: FakeService) {
  const decisions: Array<{ view: ViewPayload; points: EfficientPoints | null }> = [];
  const shells: number[][] = [];
  const dashboard = new Dashboard(
    new ApiClient(service.fetch),
    {
      decision: (view, points) => decisions.push({ view, points }),
      shell: (shell) => shells.push(shell.cells),
    },
    1, // fast polling in tests
  );
  return { dashboard, decisions, shells };
}

describe("dashboard compute loop", () => {
  it("selects bisphere-2d, computes at 200x200, renders the PLOT", async () => {
    const service = new FakeService();
    service.pendingPolls = 2;
    const { dashboard, decisions } = makeDashboard(service);
    await dashboard.loadCatalog();
    dashboard.selectProblem("bisphere-2d");
    dashboard.resolution = [200, 200];
    expect(dashboard.validationErrors()).toEqual([]);
    await dashboard.generate();

    expect(dashboard.status.kind).toBe("ready");
    expect(dashboard.method).toBe("plot");
    expect(decisions.length).toBe(1);
    expect(decisions[0].view.width).toBe(200);
    expect(decisions[0].view.height).toBe(200);
    expect(decisions[0].points?.cells).toEqual([5, 6]);
    expect(service.computeCalls).toBe(1);
  });

  it("prefills defaults and blocks invalid submissions", async () => {
    const service = new FakeService();
    const { dashboard } = makeDashboard(service);
    await dashboard.loadCatalog();
    dashboard.selectProblem("bisphere-2d");
    expect(dashboard.resolution).toEqual([1000, 1000]);
    expect(dashboard.fields.map((f) => f.name)).toEqual(["a", "b"]);
    expect(dashboard.fields[0].values).toEqual([-1, 0]);
    dashboard.fields[0].values[0] = 99; // outside the box
    expect(dashboard.validationErrors()).toHaveLength(1);
    await expect(dashboard.generate()).rejects.toThrow(/within/);
    expect(service.computeCalls).toBe(0);
  });

  it("shows the cost expense warning only when cost is selected", async () => {
    const service = new FakeService();
    const { dashboard } = makeDashboard(service);
    await dashboard.loadCatalog();
    dashboard.selectProblem("trisphere-3d");
    expect(dashboard.warning()).toBeNull();
    dashboard.methods = ["heatmap", "plot", "cost"];
    const warning = dashboard.warning();
    expect(warning?.text).toMatch(/expensive/);
    expect(warning?.needsForce).toBe(true); // 100^3 cells, k=3
    dashboard.resolution = [20, 20, 20];
    expect(dashboard.warning()?.needsForce).toBe(false);
  });
});

describe("volume controls", () => {
  async function ready3d(service: FakeService) {
    const made = makeDashboard(service);
    await made.dashboard.loadCatalog();
    made.dashboard.selectProblem("trisphere-3d");
    made.dashboard.resolution = [30, 30, 30];
    await made.dashboard.generate();
    return made;
  }

  it("slice slider issues only slice fetches and keeps efficient points", async () => {
    const service = new FakeService();
    const { dashboard, decisions } = await ready3d(service);
    expect(dashboard.sliceAxis).toBe(3); // default slicing axis
    const computesBefore = service.computeCalls;
    const logStart = service.log.length;

    await dashboard.setSliceIndex(10);
    await dashboard.setSliceIndex(20);

    const newRequests = service.log.slice(logStart);
    expect(newRequests).toHaveLength(2);
    for (const url of newRequests) {
      expect(url).toMatch(/\/api\/data\/ds1\/plot\?axis=3&index=(10|20)/);
    }
    expect(service.computeCalls).toBe(computesBefore);
    // efficient points stay visible at every slice position
    const last = decisions[decisions.length - 1];
    expect(last.points?.cells).toEqual([5, 6]);
    expect(last.view.index).toBe(20);
  });

  it("changing the slice axis refetches within the new axis range", async () => {
    const service = new FakeService();
    const { dashboard } = await ready3d(service);
    await dashboard.setSliceIndex(29);
    await dashboard.setSliceAxis(1);
    expect(service.log[service.log.length - 1]).toContain("axis=1");
    expect(service.computeCalls).toBe(1);
  });

  it("onion slider updates the shell without recompute", async () => {
    const service = new FakeService();
    const { dashboard, shells } = await ready3d(service);
    const computesBefore = service.computeCalls;
    const logStart = service.log.length;
    await dashboard.setOnionThreshold(0.7);
    expect(shells).toEqual([[1, 2, 3]]);
    const newRequests = service.log.slice(logStart);
    expect(newRequests).toHaveLength(1);
    expect(newRequests[0]).toContain("/onion?threshold=0.7");
    expect(service.computeCalls).toBe(computesBefore);
  });

  it("discards stale slice responses by sequence number", async () => {
    const service = new FakeService();
    const { dashboard, decisions } = await ready3d(service);
    service.deferViews = true;
    const first = dashboard.setSliceIndex(10);
    const second = dashboard.setSliceIndex(25);
    expect(service.deferredUrls).toHaveLength(2);
    // the newer request resolves first, then the stale one arrives late
    service.release(1);
    await second;
    const rendered = decisions.length;
    expect(decisions[rendered - 1].view.index).toBe(25);
    service.release(0);
    await first;
    expect(decisions.length).toBe(rendered); // stale response dropped
    expect(dashboard.sliceIndex).toBe(25);
  });

  it("2d datasets ignore volume controls", async () => {
    const service = new FakeService();
    const { dashboard } = makeDashboard(service);
    await dashboard.loadCatalog();
    dashboard.selectProblem("bisphere-2d");
    dashboard.resolution = [40, 40];
    await dashboard.generate();
    const logStart = service.log.length;
    await dashboard.setSliceIndex(5);
    await dashboard.setOnionThreshold(1.0);
    expect(service.log.length).toBe(logStart);
  });
});

describe("method switching", () => {
  it("only offers computed methods and refetches views, not the catalog", async () => {
    const service = new FakeService();
    const { dashboard } = makeDashboard(service);
    await dashboard.loadCatalog();
    dashboard.selectProblem("bisphere-2d");
    dashboard.resolution = [50, 50];
    await dashboard.generate();
    const catalogCalls = service.log.filter((u) => u.endsWith("/api/problems"));
    await dashboard.setMethod("heatmap");
    await expect(dashboard.setMethod("cost")).rejects.toThrow(/not computed/);
    expect(service.log.filter((u) => u.endsWith("/api/problems")))
      .toEqual(catalogCalls);
  });
});
