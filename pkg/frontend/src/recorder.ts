/**
 * Browser-side capture of searches and interactions with batching.
 *
 * Mirrors the service's reference client: the query, tag edits and comments
 * post immediately; displayed results, clicks/saves and viewing durations
 * buffer locally and flush as batches when the query changes, when ten
 * minutes pass without activity, or when the session ends. The tag set of
 * search k, as last edited, seeds search k+1 within the session.
 *
 * The clock is injectable so tests drive logical time; production passes
 * Date.now.
 */

import { UpdateWire } from "./api.js";
import { normalizeUrl } from "./compare.js";

/** The slice of the service API the recorder speaks; ApiClient satisfies it. */
export interface CaptureApi {
  userId: number;
  postQuery(body: {
    user_id: number;
    group_id: number;
    session_id: string;
    query: string;
    search_type: string;
    timestamp: number;
  }): Promise<UpdateWire>;
  putTags(resultSetId: number, tags: string[]): Promise<UpdateWire>;
  postResourceBatch(batch: object[]): Promise<UpdateWire>;
  postAction(body: {
    result_set_id: number;
    url: string;
    action: string;
    timestamp: number;
    group_id: number;
  }): Promise<UpdateWire>;
  markSaved(body: { result_set_id: number; url: string; group_id: number }): Promise<UpdateWire>;
  postViewingBatch(batch: object[]): Promise<UpdateWire>;
  postComment(resultSetId: number, text: string, timestamp: number): Promise<UpdateWire>;
}

export const FLUSH_TIMEOUT_MS = 600_000; // ten minutes of inactivity
export const NO_GROUP = 0;

export type FlushTrigger = "query_change" | "timeout" | "session_end" | "explicit";

export interface FlushReport {
  trigger: FlushTrigger;
  resourcesSent: number;
  actionsSent: number;
  viewingsSent: number;
}

export interface DisplayedResult {
  url: string;
  title: string;
  source: string;
  media_type: string;
}

interface BufferedResource extends DisplayedResult {
  rank: number;
  saved: boolean;
  saved_group_id: number;
}

interface BufferedAction {
  url: string;
  action: "clicked" | "saved";
  timestamp: number;
  group_id: number;
}

interface BufferedViewing {
  url: string;
  opened_at: number;
  duration_ms: number;
}

/** Live picture of the current search, for the current-search tab. */
export interface SearchSnapshot {
  resultSetId: number | null;
  query: string;
  clicks: { url: string; timestamp: number }[];
  saves: { url: string; timestamp: number }[];
  viewings: BufferedViewing[];
  tags: string[];
}

export class RecorderError extends Error {}

export class BrowserRecorder {
  currentResultSetId: number | null = null;
  carriedTags: string[] = [];

  private query = "";
  private resources: BufferedResource[] = [];
  private bufferedKeys = new Set<string>();
  private flushedKeys = new Set<string>();
  private nextRank = 1;
  private actions: BufferedAction[] = [];
  private viewings: BufferedViewing[] = [];
  private openViews = new Map<string, { url: string; openedAt: number }>();
  private lastActivity = 0;
  private clicksSeen: { url: string; timestamp: number }[] = [];
  private savesSeen: { url: string; timestamp: number }[] = [];
  private viewingsSeen: BufferedViewing[] = [];
  private listeners: (() => void)[] = [];

  constructor(
    private api: CaptureApi,
    public sessionId: string,
    private clock: () => number = Date.now,
  ) {}

  /** Subscribe to state changes; drives live tab rendering. */
  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  snapshot(): SearchSnapshot {
    return {
      resultSetId: this.currentResultSetId,
      query: this.query,
      clicks: [...this.clicksSeen],
      saves: [...this.savesSeen],
      viewings: [...this.viewingsSeen],
      tags: [...this.carriedTags],
    };
  }

  // ------------------------------------------------------------ searches

  /** Flush any open search, log the new query, seed carried tags. */
  async beginSearch(query: string, searchType: string, at?: number): Promise<number> {
    const now = at ?? this.clock();
    if (this.currentResultSetId !== null) {
      await this.flush("query_change", now);
    }
    const answer = await this.api.postQuery({
      user_id: this.api.userId,
      group_id: NO_GROUP,
      session_id: this.sessionId,
      query,
      search_type: searchType,
      timestamp: now,
    });
    const rsid = answer.returnid;
    this.currentResultSetId = rsid;
    this.query = query;
    this.resources = [];
    this.bufferedKeys.clear();
    this.flushedKeys.clear();
    this.nextRank = 1;
    this.actions = [];
    this.viewings = [];
    this.openViews.clear();
    this.clicksSeen = [];
    this.savesSeen = [];
    this.viewingsSeen = [];
    await this.api.putTags(rsid, [...this.carriedTags]);
    this.lastActivity = now;
    this.notify();
    return rsid;
  }

  private requireOpen(): number {
    if (this.currentResultSetId === null) {
      throw new RecorderError("no search is open in this session");
    }
    return this.currentResultSetId;
  }

  private requireKnown(url: string): string {
    const key = normalizeUrl(url);
    if (!this.bufferedKeys.has(key) && !this.flushedKeys.has(key)) {
      throw new RecorderError(`url was never displayed this search: ${url}`);
    }
    return key;
  }

  // ------------------------------------------------------------ recording

  /** Buffer displayed results; duplicates by normalized url are ignored. */
  recordDisplayed(results: DisplayedResult[], at?: number): number {
    this.requireOpen();
    const now = at ?? this.clock();
    let added = 0;
    for (const result of results) {
      const key = normalizeUrl(result.url);
      if (this.bufferedKeys.has(key) || this.flushedKeys.has(key)) {
        continue;
      }
      this.resources.push({
        ...result,
        url: result.url.trim(),
        rank: this.nextRank,
        saved: false,
        saved_group_id: NO_GROUP,
      });
      this.bufferedKeys.add(key);
      this.nextRank += 1;
      added += 1;
    }
    this.lastActivity = now;
    return added;
  }

  recordClick(url: string, at?: number): void {
    this.requireOpen();
    const now = at ?? this.clock();
    this.requireKnown(url);
    this.actions.push({ url: url.trim(), action: "clicked", timestamp: now, group_id: NO_GROUP });
    this.clicksSeen.push({ url: url.trim(), timestamp: now });
    this.lastActivity = now;
    this.notify();
  }

  recordSave(url: string, groupId = NO_GROUP, at?: number): void {
    this.requireOpen();
    const now = at ?? this.clock();
    const key = this.requireKnown(url);
    for (const resource of this.resources) {
      if (normalizeUrl(resource.url) === key) {
        resource.saved = true;
        resource.saved_group_id = groupId;
        break;
      }
    }
    this.actions.push({ url: url.trim(), action: "saved", timestamp: now, group_id: groupId });
    this.savesSeen.push({ url: url.trim(), timestamp: now });
    this.lastActivity = now;
    this.notify();
  }

  openView(url: string, at?: number): void {
    this.requireOpen();
    const now = at ?? this.clock();
    const key = this.requireKnown(url);
    if (this.openViews.has(key)) {
      throw new RecorderError(`view already open for ${url}`);
    }
    this.openViews.set(key, { url: url.trim(), openedAt: now });
    this.lastActivity = now;
  }

  closeView(url: string, at?: number): void {
    this.requireOpen();
    const now = at ?? this.clock();
    const key = normalizeUrl(url);
    const open = this.openViews.get(key);
    if (!open) {
      throw new RecorderError(`no open view for ${url}`);
    }
    this.openViews.delete(key);
    const entry = {
      url: open.url,
      opened_at: open.openedAt,
      duration_ms: Math.max(0, now - open.openedAt),
    };
    this.viewings.push(entry);
    this.viewingsSeen.push(entry);
    this.lastActivity = now;
    this.notify();
  }

  // ------------------------------------------------------------ immediate posts

  /** Replace the current search's tag set and the carried set. */
  async setTags(tags: string[], at?: number): Promise<void> {
    const rsid = this.requireOpen();
    const now = at ?? this.clock();
    await this.api.putTags(rsid, [...tags]);
    this.carriedTags = [...tags];
    this.lastActivity = now;
    this.notify();
  }

  async addComment(text: string, at?: number): Promise<number> {
    const rsid = this.requireOpen();
    if (!text.trim()) {
      throw new RecorderError("comment text must be nonempty after trimming");
    }
    const now = at ?? this.clock();
    const answer = await this.api.postComment(rsid, text, now);
    this.lastActivity = now;
    return answer.returnid;
  }

  // ------------------------------------------------------------ flushing

  /**
   * Send buffers in order: resources, then actions, then viewings. Views
   * still open are auto-closed at the flush instant. Buffers clear only
   * for what was acknowledged, so a failure leaves the rest for a retry.
   */
  async flush(trigger: FlushTrigger = "explicit", at?: number): Promise<FlushReport> {
    const report: FlushReport = { trigger, resourcesSent: 0, actionsSent: 0, viewingsSent: 0 };
    if (this.currentResultSetId === null) {
      return report;
    }
    const rsid = this.currentResultSetId;
    const now = at ?? this.clock();

    for (const [, open] of this.openViews) {
      const entry = {
        url: open.url,
        opened_at: open.openedAt,
        duration_ms: Math.max(0, now - open.openedAt),
      };
      this.viewings.push(entry);
      this.viewingsSeen.push(entry);
    }
    this.openViews.clear();

    if (this.resources.length > 0) {
      const batch = this.resources.map((r) => ({
        result_set_id: rsid,
        rank: r.rank,
        url: r.url,
        title: r.title,
        source: r.source,
        media_type: r.media_type,
        saved: r.saved,
        saved_group_id: r.saved_group_id,
      }));
      await this.api.postResourceBatch(batch);
      report.resourcesSent = batch.length;
      for (const key of this.bufferedKeys) {
        this.flushedKeys.add(key);
      }
      this.bufferedKeys.clear();
      this.resources = [];
    }

    while (this.actions.length > 0) {
      const action = this.actions[0];
      await this.api.postAction({
        result_set_id: rsid,
        url: action.url,
        action: action.action,
        timestamp: action.timestamp,
        group_id: action.group_id,
      });
      if (action.action === "saved") {
        await this.api.markSaved({
          result_set_id: rsid,
          url: action.url,
          group_id: action.group_id,
        });
      }
      this.actions.shift();
      report.actionsSent += 1;
    }

    if (this.viewings.length > 0) {
      const batch = this.viewings.map((v) => ({ result_set_id: rsid, ...v }));
      await this.api.postViewingBatch(batch);
      report.viewingsSent = batch.length;
      this.viewings = [];
    }

    this.lastActivity = now;
    return report;
  }

  /** Fire the inactivity flush when the timeout has fully elapsed. */
  async tick(now: number): Promise<FlushReport | null> {
    if (this.currentResultSetId !== null && now - this.lastActivity >= FLUSH_TIMEOUT_MS) {
      return this.flush("timeout", now);
    }
    return null;
  }

  /** Final flush; carried tags and the open search are dropped. */
  async endSession(at?: number): Promise<FlushReport> {
    const now = at ?? this.clock();
    const report = await this.flush("session_end", now);
    this.currentResultSetId = null;
    this.query = "";
    this.carriedTags = [];
    this.flushedKeys.clear();
    this.bufferedKeys.clear();
    this.nextRank = 1;
    this.notify();
    return report;
  }
}
