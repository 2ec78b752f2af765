import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, decodeF64, decodeU8 } from "../src/api.js";
import { FakeService, encodeF64 } from "./fake_service.js";

describe("payload decoding", () => {
  it("round-trips float64 arrays", () => {
    const values = [0, 1.5, -2.25, 1e-9, 12345.678];
    const decoded = decodeF64(encodeF64(values));
    expect(Array.from(decoded)).toEqual(values);
  });

  it("decodes rgb bytes", () => {
    const decoded = decodeU8(btoa(String.fromCharCode(0, 128, 255)));
    expect(Array.from(decoded)).toEqual([0, 128, 255]);
  });
});

describe("client", () => {
  it("submits compute requests and polls to completion", async () => {
    const service = new FakeService();
    service.pendingPolls = 3;
    const api = new ApiClient(service.fetch);
    const job = await api.compute({
      spec: { family: "bisphere", p: 2, k: 2, params: {} },
      resolution: [50, 50],
      methods: ["heatmap"],
    });
    expect(job.status).toBe("pending");
    const polls: string[] = [];
    const done = await api.waitReady(job.id, 1, (info) => polls.push(info.status));
    expect(done.status).toBe("ready");
    expect(polls.filter((s) => s === "pending")).toHaveLength(3);
  });

  it("raises ApiError with the status code on failures", async () => {
    const service = new FakeService();
    const api = new ApiClient(service.fetch);
    try {
      await api.meta("unknown-id");
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).status).toBe(404);
    }
  });

  it("builds slice queries and export urls", async () => {
    const service = new FakeService();
    const api = new ApiClient(service.fetch, "http://x");
    expect(api.exportUrl("ds1", "plot.ppm", { axis: 3, index: 7 }))
      .toBe("http://x/api/data/ds1/export/plot.ppm?axis=3&index=7");
    expect(api.exportUrl("ds1", "heatmap.mopf"))
      .toBe("http://x/api/data/ds1/export/heatmap.mopf");
  });
});
