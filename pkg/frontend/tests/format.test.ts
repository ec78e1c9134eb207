import { describe, expect, it } from "vitest";

import { formatDelta, formatF1, heatColor } from "../src/format.js";

describe("formatF1", () => {
  it("shows 0.938 as 93.80", () => {
    expect(formatF1(0.938)).toBe("93.80");
  });

  it("always keeps two decimals on the 0-100 scale", () => {
    expect(formatF1(1.0)).toBe("100.00");
    expect(formatF1(0.0)).toBe("0.00");
    expect(formatF1(0.93015)).toBe("93.02");
    expect(formatF1(0.9302)).toBe("93.02");
  });
});

describe("formatDelta", () => {
  it("signs both directions", () => {
    expect(formatDelta(0.0078)).toBe("+0.78");
    expect(formatDelta(-0.012)).toBe("-1.20");
    expect(formatDelta(0)).toBe("+0.00");
  });
});

describe("heatColor", () => {
  it("positive is green, negative red, zero neutral", () => {
    const positive = heatColor(0.2);
    const negative = heatColor(-0.2);
    expect(positive).not.toBe(negative);
    const [pr, pg] = positive.match(/\d+/g)!.map(Number);
    const [nr, ng] = negative.match(/\d+/g)!.map(Number);
    expect(pg).toBeGreaterThan(pr); // green dominates when positive
    expect(nr).toBeGreaterThan(ng); // red dominates when negative
    expect(heatColor(0)).toBe("rgb(245, 245, 245)");
  });

  it("mirrored values get mirrored colors", () => {
    const up = heatColor(0.3).match(/\d+/g)!.map(Number);
    const down = heatColor(-0.3).match(/\d+/g)!.map(Number);
    expect(up[1]).toBe(down[0]);
    expect(up[0]).toBe(down[1]);
  });
});
