/**
 * Search page: query box, ranked result grid, and the sliding history
 * panel with its three tabs (similar queries, complete history, current
 * search). Panel visibility is a per-user preference restored at mount.
 *
 * Tabs load asynchronously and never delay result rendering. Picking a
 * similar query diffs the current grid against that past result set and
 * badges the new items; the badge plus border carry the signal, not color
 * alone.
 */

import { ApiClient, HistoryEntryWire, SearchHitWire } from "../api.js";
import { Comparison, compareOverTime, comparisonKey } from "../compare.js";
import { clear, el, formatDuration, formatInstant } from "../dom.js";
import { loadPanelPreference, savePanelPreference } from "../prefs.js";
import { BrowserRecorder } from "../recorder.js";

export type PanelTab = "similar" | "history" | "current";

export interface SearchPageHandle {
  element: HTMLElement;
  /** Issue a search: logs the query, fetches results, renders the grid. */
  runSearch(query: string, searchType?: string): Promise<void>;
  togglePanel(): void;
  panelVisible(): boolean;
  selectTab(tab: PanelTab): Promise<void>;
  /** Diff the current grid against a past result set; badge new items. */
  compareWith(pastResultSetId: number): Promise<void>;
  clearComparison(): void;
  currentResults(): SearchHitWire[];
}

/**
 * Apply comparison flags to an already-rendered grid. Tiles whose url is
 * judged new get the is-new class and a "new" badge; all other tiles lose
 * both. Exposed separately so the badge contract is testable in isolation.
 */
export function applyComparison(grid: HTMLElement, comparison: Comparison | null): void {
  const flagged = new Map<string, boolean>();
  if (comparison) {
    for (const item of comparison.items) {
      flagged.set(comparisonKey(item.url), item.isNew);
    }
  }
  for (const tile of Array.from(grid.querySelectorAll<HTMLElement>(".tile"))) {
    const key = comparisonKey(tile.dataset.url ?? "");
    const isNew = flagged.get(key) === true;
    tile.classList.toggle("is-new", isNew);
    const existing = tile.querySelector(".new-badge");
    if (isNew && !existing) {
      tile.prepend(el("span", { class: "new-badge" }, "new"));
    } else if (!isNew && existing) {
      existing.remove();
    }
  }
}

export function mountSearchPage(
  root: HTMLElement,
  api: ApiClient,
  recorder: BrowserRecorder,
): SearchPageHandle {
  let results: SearchHitWire[] = [];
  let activeTab: PanelTab = "similar";
  let comparison: Comparison | null = null;
  let pref = loadPanelPreference(api.userId);

  const queryInput = el("input", {
    class: "query-input",
    type: "search",
    placeholder: "Search the corpus",
  });
  const typeSelect = el("select", { class: "type-select" });
  for (const kind of ["text", "image", "video"]) {
    typeSelect.append(el("option", { value: kind }, kind));
  }
  const searchButton = el("button", { class: "search-button" }, "Search");
  const grid = el("div", { class: "result-grid" });
  const statusLine = el("p", { class: "status-line" }, "Issue a search to begin.");

  const toggleButton = el("button", { class: "panel-toggle" }, "History panel");
  const panel = el("aside", { class: "history-panel" });
  const tabBar = el("div", { class: "tab-bar" });
  const tabBody = el("div", { class: "tab-body" });
  panel.append(tabBar, tabBody);

  const tabs: { id: PanelTab; label: string }[] = [
    { id: "similar", label: "Similar queries" },
    { id: "history", label: "Complete history" },
    { id: "current", label: "Current search" },
  ];
  for (const tab of tabs) {
    const button = el("button", { class: "tab", "data-tab": tab.id }, tab.label);
    button.addEventListener("click", () => {
      void selectTab(tab.id);
    });
    tabBar.append(button);
  }

  function applyPanelVisibility(): void {
    panel.classList.toggle("open", pref.visible);
    toggleButton.setAttribute("aria-expanded", String(pref.visible));
  }

  function togglePanel(): void {
    pref = { ...pref, visible: !pref.visible };
    savePanelPreference(pref);
    applyPanelVisibility();
    if (pref.visible) {
      void refreshActiveTab();
    }
  }

  toggleButton.addEventListener("click", togglePanel);

  // ---------------------------------------------------------------- grid

  function renderGrid(): void {
    clear(grid);
    results.forEach((hit, index) => {
      const tile = el("article", { class: "tile", "data-url": hit.url });
      const title = el("a", { class: "tile-title", href: hit.url }, hit.title);
      title.addEventListener("click", (event) => {
        event.preventDefault();
        recorder.recordClick(hit.url);
      });
      const save = el("button", { class: "tile-save" }, "Save");
      save.addEventListener("click", () => {
        recorder.recordSave(hit.url);
      });
      const view = el("button", { class: "tile-view" }, "View");
      let viewing = false;
      view.addEventListener("click", () => {
        if (viewing) {
          recorder.closeView(hit.url);
          view.textContent = "View";
        } else {
          recorder.openView(hit.url);
          view.textContent = "Close view";
        }
        viewing = !viewing;
      });
      tile.append(
        el("span", { class: "tile-rank" }, String(index + 1)),
        title,
        el("span", { class: "tile-meta" }, `${hit.source} · ${hit.media_type}`),
        save,
        view,
      );
      grid.append(tile);
    });
    applyComparison(grid, comparison);
  }

  async function runSearch(query: string, searchType = "text"): Promise<void> {
    comparison = null;
    await recorder.beginSearch(query, searchType);
    results = await api.search(query, searchType);
    recorder.recordDisplayed(results);
    statusLine.textContent = `${results.length} results for "${query}"`;
    renderGrid();
    // the panel catches up in the background; results never wait on it
    if (pref.visible) {
      void refreshActiveTab();
    }
  }

  searchButton.addEventListener("click", () => {
    const query = queryInput.value;
    if (query.trim()) {
      void runSearch(query, typeSelect.value);
    }
  });
  queryInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && queryInput.value.trim()) {
      void runSearch(queryInput.value, typeSelect.value);
    }
  });

  // ---------------------------------------------------------------- tabs

  function markActiveTab(): void {
    for (const button of Array.from(tabBar.querySelectorAll<HTMLElement>(".tab"))) {
      button.classList.toggle("active", button.dataset.tab === activeTab);
    }
  }

  async function refreshActiveTab(): Promise<void> {
    markActiveTab();
    if (activeTab === "similar") {
      await renderSimilarTab();
    } else if (activeTab === "history") {
      await renderHistoryTab();
    } else {
      renderCurrentTab();
    }
  }

  async function selectTab(tab: PanelTab): Promise<void> {
    activeTab = tab;
    await refreshActiveTab();
  }

  async function renderSimilarTab(): Promise<void> {
    const snapshot = recorder.snapshot();
    clear(tabBody);
    if (!snapshot.query) {
      tabBody.append(el("p", { class: "empty" }, "No search yet."));
      return;
    }
    let entries: HistoryEntryWire[];
    try {
      entries = await api.similarQueries(snapshot.query, snapshot.resultSetId ?? undefined);
    } catch {
      tabBody.append(el("p", { class: "empty" }, "Similar queries unavailable."));
      return;
    }
    clear(tabBody);
    if (entries.length === 0) {
      tabBody.append(el("p", { class: "empty" }, "You have not searched this before."));
      return;
    }
    const list = el("ul", { class: "similar-list" });
    for (const entry of entries) {
      const log = entry.query_log;
      const pick = el(
        "button",
        { class: "similar-pick", "data-rsid": String(log.result_set_id) },
        `${log.query} — ${formatInstant(log.timestamp)}`,
      );
      pick.addEventListener("click", () => {
        void compareWith(log.result_set_id);
      });
      list.append(el("li", {}, pick));
    }
    tabBody.append(list);
  }

  async function renderHistoryTab(): Promise<void> {
    clear(tabBody);
    let entries: HistoryEntryWire[];
    try {
      entries = await api.fullHistory(api.userId);
    } catch {
      tabBody.append(el("p", { class: "empty" }, "History unavailable."));
      return;
    }
    clear(tabBody);
    if (entries.length === 0) {
      tabBody.append(el("p", { class: "empty" }, "No history yet."));
      return;
    }
    const list = el("ul", { class: "history-list" });
    for (const entry of entries) {
      const log = entry.query_log;
      list.append(
        el(
          "li",
          {},
          el("span", { class: "history-query" }, log.query),
          el("span", { class: "history-when" }, ` ${formatInstant(log.timestamp)}`),
        ),
      );
    }
    tabBody.append(list);
  }

  function renderCurrentTab(): void {
    clear(tabBody);
    const snapshot = recorder.snapshot();
    if (snapshot.resultSetId === null) {
      tabBody.append(el("p", { class: "empty" }, "No search open."));
      return;
    }
    const events = el("ul", { class: "live-events" });
    for (const click of snapshot.clicks) {
      events.append(el("li", {}, `clicked ${click.url}`));
    }
    for (const save of snapshot.saves) {
      events.append(el("li", {}, `saved ${save.url}`));
    }
    for (const viewing of snapshot.viewings) {
      events.append(el("li", {}, `viewed ${viewing.url} for ${formatDuration(viewing.duration_ms)}`));
    }
    const tagInput = el("input", {
      class: "tag-input",
      value: snapshot.tags.join(", "),
      placeholder: "tags, comma separated",
    });
    const tagButton = el("button", { class: "tag-save" }, "Set tags");
    tagButton.addEventListener("click", () => {
      const tags = tagInput.value
        .split(",")
        .map((t) => t.trim())
        .filter((t) => t.length > 0);
      void recorder.setTags(tags);
    });
    const commentInput = el("input", { class: "comment-input", placeholder: "comment" });
    const commentButton = el("button", { class: "comment-post" }, "Comment");
    commentButton.addEventListener("click", () => {
      if (commentInput.value.trim()) {
        void recorder.addComment(commentInput.value).then(() => {
          commentInput.value = "";
        });
      }
    });
    tabBody.append(
      el("p", {}, `Query: ${snapshot.query}`),
      events,
      el("div", { class: "tag-row" }, tagInput, tagButton),
      el("div", { class: "comment-row" }, commentInput, commentButton),
    );
  }

  recorder.onChange(() => {
    if (pref.visible && activeTab === "current") {
      renderCurrentTab();
    }
  });

  // ---------------------------------------------------------------- diff

  async function compareWith(pastResultSetId: number): Promise<void> {
    const pastUrls = await api.resourceUrls(pastResultSetId);
    comparison = compareOverTime(results, pastUrls, pastResultSetId);
    applyComparison(grid, comparison);
    const judged = comparison.items.length;
    const fresh = comparison.items.filter((i) => i.isNew).length;
    statusLine.textContent =
      `Compared with result set ${pastResultSetId}: ` +
      `${fresh} of the first ${judged} results are new.`;
  }

  function clearComparison(): void {
    comparison = null;
    applyComparison(grid, null);
  }

  // ---------------------------------------------------------------- mount

  const bar = el("div", { class: "search-bar" }, queryInput, typeSelect, searchButton, toggleButton);
  const main = el("section", { class: "search-main" }, bar, statusLine, grid);
  const page = el("div", { class: "search-page" }, main, panel);
  applyPanelVisibility();
  markActiveTab();
  clear(root);
  root.append(page);

  return {
    element: page,
    runSearch,
    togglePanel,
    panelVisible: () => pref.visible,
    selectTab,
    compareWith,
    clearComparison,
    currentResults: () => [...results],
  };
}
