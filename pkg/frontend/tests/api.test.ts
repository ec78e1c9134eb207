import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeService, rankedSystems } from "./capture.js";

describe("ApiClient", () => {
  it("hits the documented endpoints", async () => {
    const service = new FakeService(rankedSystems(3));
    const client = new ApiClient("http://svc/", service.fetch);
    await client.health();
    await client.systems();
    await client.combine({ method: "vm", interval: [1, 3] });
    await client.bucketDiff("eLen", "sys0", "sys1");
    expect(service.requests.map((r) => r.url)).toEqual([
      "http://svc/health",
      "http://svc/systems",
      "http://svc/combine",
      "http://svc/buckets?attr=eLen&a=sys0&b=sys1",
    ]);
    expect(service.requests[2].method).toBe("POST");
  });

  it("raises ApiError with the structured detail", async () => {
    const client = new ApiClient("http://svc", async () => ({
      ok: false,
      status: 400,
      json: async () => ({ detail: "unknown system(s) ['ghost']" }),
    }));
    await expect(client.combine({ method: "vm", systems: ["ghost"] }))
      .rejects.toThrow("unknown system");
    try {
      await client.systems();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(400);
    }
  });
});
