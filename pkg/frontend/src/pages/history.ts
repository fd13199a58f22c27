/**
 * Explore-search-history page: the user's searches in reverse chronological
 * order, paged, with a date-range filter, per-entry delete behind an inline
 * confirmation, and a view-result-set button revealed on hover (kept in the
 * DOM; CSS handles the reveal).
 *
 * Paging asks the service for one entry beyond the page size to learn
 * whether a next page exists. An active date filter switches the list to
 * the time-window endpoint and suspends paging until cleared.
 */

import { ApiClient, ApiError, HistoryEntryWire } from "../api.js";
import { clear, el, formatInstant } from "../dom.js";

export interface HistoryPageOptions {
  pageSize?: number;
  /** Route changes go through here so tests can observe navigation. */
  navigate?: (hash: string) => void;
}

export interface HistoryPageHandle {
  element: HTMLElement;
  /** Resolves when the first page has rendered. */
  ready: Promise<void>;
  entries(): HistoryEntryWire[];
  pageIndex(): number;
  hasNextPage(): boolean;
  nextPage(): Promise<void>;
  prevPage(): Promise<void>;
  applyDateFilter(startMs: number, endMs: number): Promise<void>;
  clearDateFilter(): Promise<void>;
  /** First click arms the confirmation; confirmDelete completes it. */
  requestDelete(resultSetId: number): void;
  confirmDelete(resultSetId: number): Promise<void>;
  refresh(): Promise<void>;
}

export function mountHistoryPage(
  root: HTMLElement,
  api: ApiClient,
  opts: HistoryPageOptions = {},
): HistoryPageHandle {
  const pageSize = opts.pageSize ?? 10;
  const navigate = opts.navigate ?? ((hash: string) => {
    window.location.hash = hash;
  });

  let page = 0;
  let entries: HistoryEntryWire[] = [];
  let nextExists = false;
  let dateFilter: { startMs: number; endMs: number } | null = null;
  let armedDelete: number | null = null;

  const heading = el("h2", {}, "Explore search history");
  const statusLine = el("p", { class: "status-line" }, "");
  const list = el("ul", { class: "explore-list" });

  const prevButton = el("button", { class: "page-prev" }, "Previous");
  const nextButton = el("button", { class: "page-next" }, "Next");
  const pageLabel = el("span", { class: "page-label" }, "");
  const pager = el("div", { class: "pager" }, prevButton, pageLabel, nextButton);

  const startInput = el("input", { class: "filter-start", type: "date" });
  const endInput = el("input", { class: "filter-end", type: "date" });
  const filterButton = el("button", { class: "filter-apply" }, "Filter by date");
  const clearButton = el("button", { class: "filter-clear" }, "Clear filter");
  const filterRow = el(
    "div",
    { class: "filter-row" },
    startInput,
    endInput,
    filterButton,
    clearButton,
  );

  function renderList(): void {
    clear(list);
    if (entries.length === 0) {
      const message = dateFilter
        ? "No searches in this date range."
        : "No searches recorded yet.";
      list.append(el("li", { class: "empty" }, message));
      return;
    }
    for (const entry of entries) {
      const log = entry.query_log;
      const row = el("li", { class: "explore-row", "data-rsid": String(log.result_set_id) });
      const summary = el(
        "span",
        { class: "row-summary" },
        el("span", { class: "row-query" }, log.query),
        el("span", { class: "row-when" }, ` ${formatInstant(log.timestamp)}`),
        el(
          "span",
          { class: "row-counts" },
          ` · ${entry.clicked.length} clicked, ${entry.saved.length} saved`,
        ),
      );
      const viewButton = el("button", { class: "row-view" }, "View result set");
      viewButton.addEventListener("click", () => {
        navigate(`#/set/${log.result_set_id}`);
      });
      const deleteButton = el("button", { class: "row-delete" }, "Delete");
      const confirmButton = el("button", { class: "row-confirm" }, "Really delete?");
      const cancelButton = el("button", { class: "row-cancel" }, "Keep");
      const confirmBox = el("span", { class: "confirm-box" }, confirmButton, cancelButton);
      confirmBox.hidden = true;
      deleteButton.addEventListener("click", () => {
        requestDelete(log.result_set_id);
      });
      confirmButton.addEventListener("click", () => {
        void confirmDelete(log.result_set_id);
      });
      cancelButton.addEventListener("click", () => {
        armedDelete = null;
        renderList();
      });
      if (armedDelete === log.result_set_id) {
        deleteButton.hidden = true;
        confirmBox.hidden = false;
      }
      row.append(summary, viewButton, deleteButton, confirmBox);
      list.append(row);
    }
  }

  async function loadPage(): Promise<void> {
    // one extra entry answers "is there a next page" without a count call
    const fetched = await api.historyPage(api.userId, page * pageSize, pageSize + 1);
    nextExists = fetched.length > pageSize;
    entries = fetched.slice(0, pageSize);
    pageLabel.textContent = `Page ${page + 1}`;
    prevButton.disabled = page === 0;
    nextButton.disabled = !nextExists;
    pager.hidden = false;
    statusLine.textContent = "";
    renderList();
  }

  async function loadFiltered(): Promise<void> {
    if (!dateFilter) {
      return;
    }
    entries = await api.historyByTime(dateFilter.startMs, dateFilter.endMs);
    nextExists = false;
    pager.hidden = true;
    statusLine.textContent =
      `Showing ${entries.length} searches between ` +
      `${formatInstant(dateFilter.startMs)} and ${formatInstant(dateFilter.endMs)}.`;
    renderList();
  }

  async function refresh(): Promise<void> {
    armedDelete = null;
    if (dateFilter) {
      await loadFiltered();
    } else {
      await loadPage();
    }
  }

  async function nextPage(): Promise<void> {
    if (!nextExists || dateFilter) {
      return;
    }
    page += 1;
    await loadPage();
  }

  async function prevPage(): Promise<void> {
    if (page === 0 || dateFilter) {
      return;
    }
    page -= 1;
    await loadPage();
  }

  async function applyDateFilter(startMs: number, endMs: number): Promise<void> {
    dateFilter = { startMs, endMs };
    armedDelete = null;
    await loadFiltered();
  }

  async function clearDateFilter(): Promise<void> {
    dateFilter = null;
    page = 0;
    await refresh();
  }

  function requestDelete(resultSetId: number): void {
    armedDelete = resultSetId;
    renderList();
  }

  async function confirmDelete(resultSetId: number): Promise<void> {
    try {
      await api.deleteResultSets([resultSetId]);
    } catch (err) {
      statusLine.textContent =
        err instanceof ApiError ? `Delete failed: ${err.reason}` : "Delete failed.";
      armedDelete = null;
      renderList();
      return;
    }
    armedDelete = null;
    // deleting the page's last entry steps back rather than showing a hole
    if (!dateFilter && entries.length === 1 && page > 0) {
      page -= 1;
    }
    await refresh();
  }

  nextButton.addEventListener("click", () => {
    void nextPage();
  });
  prevButton.addEventListener("click", () => {
    void prevPage();
  });
  filterButton.addEventListener("click", () => {
    if (startInput.value && endInput.value) {
      const startMs = Date.parse(`${startInput.value}T00:00:00Z`);
      const endMs = Date.parse(`${endInput.value}T23:59:59.999Z`);
      void applyDateFilter(startMs, endMs);
    }
  });
  clearButton.addEventListener("click", () => {
    void clearDateFilter();
  });

  const pageEl = el("div", { class: "history-page" }, heading, filterRow, statusLine, list, pager);
  clear(root);
  root.append(pageEl);

  return {
    element: pageEl,
    ready: refresh(),
    entries: () => [...entries],
    pageIndex: () => page,
    hasNextPage: () => nextExists,
    nextPage,
    prevPage,
    applyDateFilter,
    clearDateFilter,
    requestDelete,
    confirmDelete,
    refresh,
  };
}
