import { beforeEach, describe, expect, it } from "vitest";

import { UpdateWire } from "../src/api.js";
import { BrowserRecorder, CaptureApi, FLUSH_TIMEOUT_MS } from "../src/recorder.js";

const T0 = 1_700_000_000_000;

/** Records every wire call; result set ids count up from 1. */
class FakeApi implements CaptureApi {
  userId = 8638;
  calls: { path: string; body: unknown }[] = [];
  private nextId = 1;

  private updated(returnid: number): Promise<UpdateWire> {
    return Promise.resolve({ message: "Database Successfully Updated", returnid });
  }

  postQuery(body: object): Promise<UpdateWire> {
    this.calls.push({ path: "querylog", body });
    return this.updated(this.nextId++);
  }
  putTags(resultSetId: number, tags: string[]): Promise<UpdateWire> {
    this.calls.push({ path: "taglist", body: { resultSetId, tags } });
    return this.updated(-1);
  }
  postResourceBatch(batch: object[]): Promise<UpdateWire> {
    this.calls.push({ path: "xmlbatchresultsetlog", body: batch });
    return this.updated(-1);
  }
  postAction(body: object): Promise<UpdateWire> {
    this.calls.push({ path: "resourcelog", body });
    return this.updated(-1);
  }
  markSaved(body: object): Promise<UpdateWire> {
    this.calls.push({ path: "updateresultset", body });
    return this.updated(-1);
  }
  postViewingBatch(batch: object[]): Promise<UpdateWire> {
    this.calls.push({ path: "updatebatchviewingtimelog", body: batch });
    return this.updated(-1);
  }
  postComment(resultSetId: number, text: string, timestamp: number): Promise<UpdateWire> {
    this.calls.push({ path: "searchcomment", body: { resultSetId, text, timestamp } });
    return this.updated(1);
  }

  paths(): string[] {
    return this.calls.map((c) => c.path);
  }
}

function results(n: number, offset = 0) {
  return Array.from({ length: n }, (_, i) => ({
    url: `https://r.example/${offset + i}`,
    title: `r${offset + i}`,
    source: "web",
    media_type: "text",
  }));
}

describe("BrowserRecorder", () => {
  let api: FakeApi;
  let recorder: BrowserRecorder;

  beforeEach(() => {
    api = new FakeApi();
    recorder = new BrowserRecorder(api, "s-1", () => T0);
  });

  it("posts the query immediately and buffers everything else", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(3), T0 + 10);
    recorder.recordClick("https://r.example/0", T0 + 20);
    expect(api.paths()).toEqual(["querylog", "taglist"]);
  });

  it("flushes resources, then actions, then viewings", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(3), T0 + 10);
    recorder.recordClick("https://r.example/0", T0 + 20);
    recorder.recordSave("https://r.example/1", 0, T0 + 30);
    recorder.openView("https://r.example/2", T0 + 40);
    recorder.closeView("https://r.example/2", T0 + 50);
    const report = await recorder.flush("explicit", T0 + 60);
    expect(report).toEqual({
      trigger: "explicit",
      resourcesSent: 3,
      actionsSent: 2,
      viewingsSent: 1,
    });
    expect(api.paths().slice(2)).toEqual([
      "xmlbatchresultsetlog",
      "resourcelog",
      "resourcelog",
      "updateresultset",
      "updatebatchviewingtimelog",
    ]);
  });

  it("fires the inactivity flush at exactly the timeout, not before", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(2), T0);
    expect(await recorder.tick(T0 + FLUSH_TIMEOUT_MS - 1)).toBeNull();
    const report = await recorder.tick(T0 + FLUSH_TIMEOUT_MS);
    expect(report?.trigger).toBe("timeout");
    expect(report?.resourcesSent).toBe(2);
  });

  it("treats every recorded event as activity", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(2), T0 + 1000);
    expect(await recorder.tick(T0 + 1000 + FLUSH_TIMEOUT_MS - 1)).toBeNull();
    expect((await recorder.tick(T0 + 1000 + FLUSH_TIMEOUT_MS))?.trigger).toBe("timeout");
  });

  it("flushes the previous buffers when the query changes", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(2), T0 + 10);
    await recorder.beginSearch("arches", "text", T0 + 20);
    const batchIndex = api.paths().indexOf("xmlbatchresultsetlog");
    const secondQueryIndex = api.paths().lastIndexOf("querylog");
    expect(batchIndex).toBeGreaterThan(-1);
    expect(batchIndex).toBeLessThan(secondQueryIndex);
  });

  it("empties buffers at session end and drops the open search", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(2), T0 + 10);
    const report = await recorder.endSession(T0 + 20);
    expect(report.trigger).toBe("session_end");
    expect(report.resourcesSent).toBe(2);
    expect(recorder.currentResultSetId).toBeNull();
    expect(() => recorder.recordDisplayed(results(1))).toThrow(/no search is open/);
  });

  it("auto-closes open views at flush time", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(1), T0);
    recorder.openView("https://r.example/0", T0 + 100);
    const report = await recorder.flush("explicit", T0 + 7500);
    expect(report.viewingsSent).toBe(1);
    const batch = api.calls.find((c) => c.path === "updatebatchviewingtimelog");
    expect((batch?.body as { duration_ms: number }[])[0].duration_ms).toBe(7400);
  });

  it("deduplicates displayed urls across flushes by normalized form", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    expect(recorder.recordDisplayed(results(2), T0)).toBe(2);
    await recorder.flush("explicit", T0 + 10);
    const again = recorder.recordDisplayed(
      [
        { url: "HTTPS://R.EXAMPLE/0", title: "dupe", source: "web", media_type: "text" },
        ...results(1, 5),
      ],
      T0 + 20,
    );
    expect(again).toBe(1);
    await recorder.flush("explicit", T0 + 30);
    const batches = api.calls.filter((c) => c.path === "xmlbatchresultsetlog");
    const ranks = (batches[1].body as { rank: number }[]).map((r) => r.rank);
    expect(ranks).toEqual([3]); // ranks continue, dupe was skipped
  });

  it("carries the last edited tag set into the next search", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    await recorder.setTags(["stone", "arch"], T0 + 10);
    await recorder.beginSearch("arches", "text", T0 + 20);
    const tagCalls = api.calls.filter((c) => c.path === "taglist");
    expect(tagCalls.map((c) => (c.body as { tags: string[] }).tags)).toEqual([
      [],
      ["stone", "arch"],
      ["stone", "arch"],
    ]);
    await recorder.endSession(T0 + 30);
    await recorder.beginSearch("fresh", "text", T0 + 40);
    const last = api.calls.filter((c) => c.path === "taglist").at(-1);
    expect((last?.body as { tags: string[] }).tags).toEqual([]);
  });

  it("rejects interactions with urls never displayed", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(1), T0);
    expect(() => recorder.recordClick("https://other.example/x", T0)).toThrow(/never displayed/);
  });

  it("keeps unsent buffers when the transport fails, for a retry", async () => {
    let failNext = true;
    const flaky = new FakeApi();
    const realBatch = flaky.postResourceBatch.bind(flaky);
    flaky.postResourceBatch = (batch) => {
      if (failNext) {
        failNext = false;
        return Promise.reject(new Error("Failed : HTTP error code : 503"));
      }
      return realBatch(batch);
    };
    const rec = new BrowserRecorder(flaky, "s-2", () => T0);
    await rec.beginSearch("bridges", "text", T0);
    rec.recordDisplayed(results(2), T0);
    rec.recordClick("https://r.example/0", T0 + 5);
    await expect(rec.flush("explicit", T0 + 10)).rejects.toThrow(/503/);
    expect(flaky.paths()).not.toContain("resourcelog");
    const report = await rec.flush("explicit", T0 + 20);
    expect(report.resourcesSent).toBe(2);
    expect(report.actionsSent).toBe(1);
  });

  it("reports live state through snapshots", async () => {
    await recorder.beginSearch("bridges", "text", T0);
    recorder.recordDisplayed(results(2), T0);
    recorder.recordClick("https://r.example/0", T0 + 5);
    recorder.recordSave("https://r.example/1", 0, T0 + 6);
    recorder.openView("https://r.example/0", T0 + 10);
    recorder.closeView("https://r.example/0", T0 + 30);
    const snapshot = recorder.snapshot();
    expect(snapshot.clicks).toHaveLength(1);
    expect(snapshot.saves).toHaveLength(1);
    expect(snapshot.viewings).toEqual([
      { url: "https://r.example/0", opened_at: T0 + 10, duration_ms: 20 },
    ]);
  });
});
