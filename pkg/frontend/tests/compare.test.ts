import { describe, expect, it } from "vitest";

import { compareOverTime, comparisonKey, normalizeUrl } from "../src/compare.js";

// deterministic PRNG so the randomized law is reproducible
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("normalizeUrl", () => {
  it("lowercases scheme and host, keeps path casing", () => {
    expect(normalizeUrl("HTTPS://Example.COM/Deep/Path?Q=1#Frag")).toBe(
      "https://example.com/Deep/Path?Q=1#Frag",
    );
  });

  it("trims surrounding whitespace", () => {
    expect(normalizeUrl("  https://a.example/x  ")).toBe("https://a.example/x");
  });

  it("keeps ports and userinfo inside the lowercased authority", () => {
    expect(normalizeUrl("http://User@Host.Example:8080/p")).toBe("http://user@host.example:8080/p");
  });

  it("leaves schemeless strings alone apart from trimming", () => {
    expect(normalizeUrl(" example.com/path ")).toBe("example.com/path");
  });

  it("lowercases the scheme of non-authority urls", () => {
    expect(normalizeUrl("MAILTO:Someone@example.com")).toBe("mailto:Someone@example.com");
  });

  it("is idempotent", () => {
    const cases = [
      "HTTPS://A.B/c",
      "  http://x.y/Z?q=Q  ",
      "ftp://Host/Dir/",
      "no-scheme/path",
    ];
    for (const raw of cases) {
      expect(normalizeUrl(normalizeUrl(raw))).toBe(normalizeUrl(raw));
    }
  });
});

describe("comparisonKey", () => {
  it("strips trailing slashes after normalizing", () => {
    expect(comparisonKey("https://Example.com/docs/")).toBe("https://example.com/docs");
    expect(comparisonKey("https://example.com/docs///")).toBe("https://example.com/docs");
  });

  it("equates host-case and trailing-slash variants", () => {
    expect(comparisonKey("HTTPS://A.example/x/")).toBe(comparisonKey("https://a.EXAMPLE/x"));
  });
});

describe("compareOverTime", () => {
  const current = [
    { url: "https://a.example/1", title: "one" },
    { url: "https://a.example/2", title: "two" },
    { url: "https://a.example/3", title: "three" },
    { url: "https://a.example/4", title: "four" },
  ];

  it("flags membership against the past set over the first n results", () => {
    const past = ["https://a.example/2", "https://a.example/9", "https://a.example/1"];
    const result = compareOverTime(current, past, 42);
    expect(result.pastResultSetId).toBe(42);
    expect(result.depth).toBe(3);
    expect(result.items.map((i) => i.isNew)).toEqual([false, false, true]);
    expect(result.items.map((i) => i.title)).toEqual(["one", "two", "three"]);
  });

  it("yields depth 0 and no items for an empty past set", () => {
    const result = compareOverTime(current, [], 7);
    expect(result.depth).toBe(0);
    expect(result.items).toEqual([]);
  });

  it("keeps depth at the past size when current is shorter", () => {
    const past = Array.from({ length: 10 }, (_, i) => `https://p.example/${i}`);
    const result = compareOverTime(current.slice(0, 2), past, 7);
    expect(result.depth).toBe(10);
    expect(result.items).toHaveLength(2);
    expect(result.items.every((i) => i.isNew)).toBe(true);
  });

  it("matches through host case and trailing slash differences", () => {
    const result = compareOverTime(
      [{ url: "https://A.example/x/", title: "t" }],
      ["https://a.EXAMPLE/x"],
      1,
    );
    expect(result.items[0].isNew).toBe(false);
  });

  it("agrees with brute-force set membership on random pairs", () => {
    const rand = mulberry32(0xc0ffee);
    const pool = Array.from({ length: 60 }, (_, i) => `https://pool.example/p/${i}`);
    for (let trial = 0; trial < 200; trial++) {
      const pastSize = Math.floor(rand() * 40);
      const currentSize = Math.floor(rand() * 40);
      const past = [...pool].sort(() => rand() - 0.5).slice(0, pastSize);
      const cur = Array.from({ length: currentSize }, () => ({
        url: pool[Math.floor(rand() * pool.length)],
        title: "t",
      }));
      const result = compareOverTime(cur, past, trial + 1);
      expect(result.depth).toBe(past.length);
      expect(result.items).toHaveLength(Math.min(past.length, cur.length));
      const pastKeys = new Set(past.map(comparisonKey));
      result.items.forEach((item, index) => {
        expect(item.url).toBe(cur[index].url);
        expect(item.isNew).toBe(!pastKeys.has(comparisonKey(item.url)));
      });
    }
  });
});
