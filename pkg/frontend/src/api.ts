/**
 * Typed client for the tracking service's JSON API.
 *
 * Identity travels as the X-User-Id header on every request. Responses are
 * JSON throughout; non-200 answers carry {code, reason} and surface here as
 * ApiError. Concurrent GETs to the same path are deduplicated: callers
 * awaiting the same resource share one in-flight request.
 */

const BASE = "/searchlog";

export interface QueryLogWire {
  result_set_id: number;
  user_id: number;
  group_id: number;
  session_id: string;
  query: string;
  search_type: string;
  timestamp: number;
}

export interface ResourceWire {
  result_set_id: number;
  rank: number;
  url: string;
  title: string;
  source: string;
  media_type: string;
  saved: boolean;
  saved_group_id: number;
}

export interface ActionWire {
  result_set_id: number;
  url: string;
  action: string;
  acting_user_id: number;
  timestamp: number;
  group_id: number;
}

export interface ViewingWire {
  result_set_id: number;
  url: string;
  opened_at: number;
  duration_ms: number;
}

export interface CommentWire {
  comment_id: number;
  result_set_id: number;
  author_id: number;
  text: string;
  timestamp: number;
}

export interface GrantWire {
  owner_id: number;
  grantee_id: number;
  result_set_id: number;
  timestamp: number;
}

export interface HistoryEntryWire {
  query_log: QueryLogWire;
  clicked: ResourceWire[];
  saved: ResourceWire[];
  event_timestamps: Record<string, number>;
}

export interface SharedEntryWire {
  grant: GrantWire;
  entry: HistoryEntryWire;
}

export interface DateGroupWire {
  date: string;
  entries: HistoryEntryWire[];
}

/** Full annotated view of one result set, shape of the action-filter endpoint. */
export interface ResultSetLogWire {
  resources: ResourceWire[];
  actions: ActionWire[];
  viewing_times: ViewingWire[];
  tags: string[];
  comments: CommentWire[];
}

export interface SearchHitWire {
  url: string;
  title: string;
  source: string;
  media_type: string;
}

export interface UpdateWire {
  message: string;
  returnid: number;
}

export type ActionFilter = "all" | "clicked" | "not_clicked" | "saved";

export class ApiError extends Error {
  constructor(
    public code: number,
    public reason: string,
  ) {
    super(`${code}: ${reason}`);
    this.name = "ApiError";
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private baseUrl: string,
    public userId: number,
    private fetchImpl: FetchLike = fetch.bind(globalThis),
  ) {}

  private async exchange<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "X-User-Id": String(this.userId) };
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: payload,
    });
    const answer = (await response.json()) as T;
    if (response.status !== 200) {
      const err = answer as unknown as { code?: number; reason?: string };
      throw new ApiError(err.code ?? response.status, err.reason ?? "request failed");
    }
    return answer;
  }

  /** GET with per-path in-flight deduplication. */
  get<T>(path: string): Promise<T> {
    const pending = this.inflight.get(path);
    if (pending) {
      return pending as Promise<T>;
    }
    const request = this.exchange<T>("GET", path).finally(() => {
      this.inflight.delete(path);
    });
    this.inflight.set(path, request);
    return request;
  }

  post<T>(path: string, body?: unknown): Promise<T> {
    return this.exchange<T>("POST", path, body);
  }

  // ------------------------------------------------------------ searching

  search(query: string, type: string, limit = 20): Promise<SearchHitWire[]> {
    const q = encodeURIComponent(query);
    return this.get(`/search?q=${q}&type=${type}&limit=${limit}`);
  }

  // ------------------------------------------------------------ capture

  postQuery(body: {
    user_id: number;
    group_id: number;
    session_id: string;
    query: string;
    search_type: string;
    timestamp: number;
  }): Promise<UpdateWire> {
    return this.post(`${BASE}/querylog`, body);
  }

  postResourceBatch(batch: object[]): Promise<UpdateWire> {
    return this.post(`${BASE}/xmlbatchresultsetlog`, batch);
  }

  postAction(body: {
    result_set_id: number;
    url: string;
    action: string;
    timestamp: number;
    group_id: number;
  }): Promise<UpdateWire> {
    return this.post(`${BASE}/resourcelog`, body);
  }

  markSaved(body: { result_set_id: number; url: string; group_id: number }): Promise<UpdateWire> {
    return this.post(`${BASE}/updateresultset`, body);
  }

  postViewingBatch(batch: object[]): Promise<UpdateWire> {
    return this.post(`${BASE}/updatebatchviewingtimelog`, batch);
  }

  putTags(resultSetId: number, tags: string[]): Promise<UpdateWire> {
    return this.post(`${BASE}/taglist`, { result_set_id: resultSetId, tags });
  }

  postComment(resultSetId: number, text: string, timestamp: number): Promise<UpdateWire> {
    return this.post(`${BASE}/searchcomment`, {
      result_set_id: resultSetId,
      text,
      timestamp,
    });
  }

  // ------------------------------------------------------------ history

  historyPage(userId: number, offset: number, limit: number): Promise<HistoryEntryWire[]> {
    return this.get(`${BASE}/searchhistorybypages/${userId}/${offset}/${limit}`);
  }

  historyByTime(startMs: number, endMs: number): Promise<HistoryEntryWire[]> {
    return this.get(`${BASE}/filterqueriesbytime/${startMs}/${endMs}`);
  }

  similarQueries(query: string, excludeResultSetId?: number): Promise<HistoryEntryWire[]> {
    let path = `${BASE}/searchhistorybyquery/${encodeURIComponent(query)}`;
    if (excludeResultSetId !== undefined) {
      path += `?exclude=${excludeResultSetId}`;
    }
    return this.get(path);
  }

  fullHistory(userId: number): Promise<HistoryEntryWire[]> {
    return this.get(`${BASE}/searchhistory/${userId}`);
  }

  /** Cascade-delete own result sets; the caller is the authority. */
  deleteResultSets(resultSetIds: number[]): Promise<UpdateWire> {
    return this.exchange("DELETE", `${BASE}/deleteuserqueries`, {
      result_set_ids: resultSetIds,
    });
  }

  // ------------------------------------------------------------ result sets

  resourceUrls(resultSetId: number): Promise<string[]> {
    return this.get(`${BASE}/resourceurlsbyresultsetid/${resultSetId}`);
  }

  resultSetLog(resultSetId: number, filter: ActionFilter): Promise<ResultSetLogWire> {
    return this.get(`${BASE}/resourceslogbyresultsetidandaction/${resultSetId}/${filter}`);
  }

  comments(resultSetId: number): Promise<CommentWire[]> {
    return this.get(`${BASE}/commentsbyresultsetid/${resultSetId}`);
  }

  tags(resultSetId: number): Promise<string[]> {
    return this.get(`${BASE}/tagsbyresultsetid/${resultSetId}`);
  }

  share(ownerId: number, granteeId: number, resultSetId: number): Promise<UpdateWire> {
    return this.post(`${BASE}/shareresultset/${ownerId}/${granteeId}/${resultSetId}`);
  }

  sharedWith(userId: number): Promise<SharedEntryWire[]> {
    return this.get(`${BASE}/sharedresultsetsbyuserid/${userId}`);
  }
}
