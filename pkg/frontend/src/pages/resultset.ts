/**
 * View-result-set page for one past search: the stored grid in the same
 * tile layout as the search page, an action filter (all / clicked /
 * not_clicked / saved), a timeline of every recorded event in timestamp
 * order, tag and comment editors, and a share control. New clicks and
 * saves made here post against the same result set id.
 *
 * A caller without access gets the error panel instead of the grid.
 */

import { ActionFilter, ApiClient, ApiError, ResultSetLogWire } from "../api.js";
import { clear, el, formatDuration, formatInstant } from "../dom.js";

const FILTERS: ActionFilter[] = ["all", "clicked", "not_clicked", "saved"];

export interface ResultSetPageHandle {
  element: HTMLElement;
  ready: Promise<void>;
  setFilter(filter: ActionFilter): Promise<void>;
  activeFilter(): ActionFilter;
  view(): ResultSetLogWire | null;
  /** Status code of a failed load (403 for strangers), null when loaded. */
  loadError(): number | null;
  recordClick(url: string): Promise<void>;
  recordSave(url: string, groupId?: number): Promise<void>;
  saveTags(tags: string[]): Promise<void>;
  postComment(text: string): Promise<void>;
  share(granteeId: number): Promise<void>;
  refresh(): Promise<void>;
}

interface TimelineEvent {
  timestamp: number;
  label: string;
}

function timelineOf(view: ResultSetLogWire): TimelineEvent[] {
  const events: TimelineEvent[] = [];
  for (const action of view.actions) {
    events.push({
      timestamp: action.timestamp,
      label: `user ${action.acting_user_id} ${action.action} ${action.url}`,
    });
  }
  for (const viewing of view.viewing_times) {
    events.push({
      timestamp: viewing.opened_at,
      label: `viewed ${viewing.url} for ${formatDuration(viewing.duration_ms)}`,
    });
  }
  for (const comment of view.comments) {
    events.push({
      timestamp: comment.timestamp,
      label: `user ${comment.author_id} commented: ${comment.text}`,
    });
  }
  events.sort((a, b) => a.timestamp - b.timestamp);
  return events;
}

export function mountResultSetPage(
  root: HTMLElement,
  api: ApiClient,
  resultSetId: number,
  opts: { clock?: () => number } = {},
): ResultSetPageHandle {
  const clock = opts.clock ?? Date.now;
  let filter: ActionFilter = "all";
  let view: ResultSetLogWire | null = null;
  let failedWith: number | null = null;

  const heading = el("h2", {}, `Result set ${resultSetId}`);
  const statusLine = el("p", { class: "status-line" }, "");
  const filterBar = el("div", { class: "filter-bar" });
  for (const name of FILTERS) {
    const button = el("button", { class: "filter-pick", "data-filter": name }, name);
    button.addEventListener("click", () => {
      void setFilter(name);
    });
    filterBar.append(button);
  }
  const grid = el("div", { class: "result-grid" });
  const timeline = el("ul", { class: "timeline" });
  const panel = el("aside", { class: "set-panel" }, el("h3", {}, "Timeline"), timeline);

  const tagInput = el("input", { class: "tag-input", placeholder: "tags, comma separated" });
  const tagButton = el("button", { class: "tag-save" }, "Save tags");
  const commentInput = el("input", { class: "comment-input", placeholder: "comment" });
  const commentButton = el("button", { class: "comment-post" }, "Comment");
  const shareInput = el("input", { class: "share-input", type: "number", placeholder: "user id" });
  const shareButton = el("button", { class: "share-send" }, "Share");
  const editors = el(
    "div",
    { class: "editors" },
    el("div", { class: "tag-row" }, tagInput, tagButton),
    el("div", { class: "comment-row" }, commentInput, commentButton),
    el("div", { class: "share-row" }, shareInput, shareButton),
  );

  const errorPanel = el("div", { class: "error-panel" });
  errorPanel.hidden = true;

  function markActiveFilter(): void {
    for (const button of Array.from(filterBar.querySelectorAll<HTMLElement>(".filter-pick"))) {
      button.classList.toggle("active", button.dataset.filter === filter);
    }
  }

  function renderGrid(): void {
    clear(grid);
    if (!view) {
      return;
    }
    for (const resource of view.resources) {
      const tile = el("article", { class: "tile", "data-url": resource.url });
      const title = el("a", { class: "tile-title", href: resource.url }, resource.title);
      title.addEventListener("click", (event) => {
        event.preventDefault();
        void recordClick(resource.url);
      });
      const save = el("button", { class: "tile-save" }, resource.saved ? "Saved" : "Save");
      save.addEventListener("click", () => {
        void recordSave(resource.url);
      });
      tile.append(
        el("span", { class: "tile-rank" }, String(resource.rank)),
        title,
        el("span", { class: "tile-meta" }, `${resource.source} · ${resource.media_type}`),
        save,
      );
      grid.append(tile);
    }
  }

  function renderTimeline(): void {
    clear(timeline);
    if (!view) {
      return;
    }
    const events = timelineOf(view);
    if (events.length === 0) {
      timeline.append(el("li", { class: "empty" }, "No recorded events."));
      return;
    }
    for (const event of events) {
      timeline.append(el("li", {}, `${formatInstant(event.timestamp)} — ${event.label}`));
    }
  }

  function renderError(): void {
    clear(errorPanel);
    errorPanel.hidden = failedWith === null;
    if (failedWith === 403) {
      errorPanel.append(
        el("h3", {}, "403"),
        el("p", {}, "You do not have access to this result set."),
      );
    } else if (failedWith !== null) {
      errorPanel.append(el("h3", {}, String(failedWith)), el("p", {}, "Could not load result set."));
    }
    grid.hidden = failedWith !== null;
    panel.hidden = failedWith !== null;
    editors.hidden = failedWith !== null;
    filterBar.hidden = failedWith !== null;
  }

  async function refresh(): Promise<void> {
    try {
      view = await api.resultSetLog(resultSetId, filter);
      failedWith = null;
    } catch (err) {
      view = null;
      failedWith = err instanceof ApiError ? err.code : 500;
      renderError();
      return;
    }
    renderError();
    markActiveFilter();
    tagInput.value = view.tags.join(", ");
    renderGrid();
    renderTimeline();
  }

  async function setFilter(next: ActionFilter): Promise<void> {
    filter = next;
    await refresh();
  }

  async function recordClick(url: string): Promise<void> {
    await api.postAction({
      result_set_id: resultSetId,
      url,
      action: "clicked",
      timestamp: clock(),
      group_id: 0,
    });
    await refresh();
  }

  async function recordSave(url: string, groupId = 0): Promise<void> {
    const now = clock();
    await api.postAction({
      result_set_id: resultSetId,
      url,
      action: "saved",
      timestamp: now,
      group_id: groupId,
    });
    await api.markSaved({ result_set_id: resultSetId, url, group_id: groupId });
    await refresh();
  }

  async function saveTags(tags: string[]): Promise<void> {
    await api.putTags(resultSetId, tags);
    await refresh();
  }

  async function postComment(text: string): Promise<void> {
    await api.postComment(resultSetId, text, clock());
    await refresh();
  }

  async function share(granteeId: number): Promise<void> {
    try {
      await api.share(api.userId, granteeId, resultSetId);
      statusLine.textContent = `Shared with user ${granteeId}.`;
    } catch (err) {
      statusLine.textContent =
        err instanceof ApiError ? `Share failed: ${err.reason}` : "Share failed.";
    }
  }

  tagButton.addEventListener("click", () => {
    const tags = tagInput.value
      .split(",")
      .map((t) => t.trim())
      .filter((t) => t.length > 0);
    void saveTags(tags);
  });
  commentButton.addEventListener("click", () => {
    if (commentInput.value.trim()) {
      void postComment(commentInput.value).then(() => {
        commentInput.value = "";
      });
    }
  });
  shareButton.addEventListener("click", () => {
    const grantee = Number(shareInput.value);
    if (Number.isInteger(grantee) && grantee >= 1) {
      void share(grantee);
    }
  });

  const main = el("section", { class: "set-main" }, heading, statusLine, filterBar, grid, editors);
  const pageEl = el("div", { class: "set-page" }, errorPanel, main, panel);
  clear(root);
  root.append(pageEl);

  return {
    element: pageEl,
    ready: refresh(),
    setFilter,
    activeFilter: () => filter,
    view: () => (view ? { ...view } : null),
    loadError: () => failedWith,
    recordClick,
    recordSave,
    saveTags,
    postComment,
    share,
    refresh,
  };
}
