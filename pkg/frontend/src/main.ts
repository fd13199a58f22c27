/**
 * App shell: dev login selector, hash routing over the three pages, and a
 * timer driving the recorder's inactivity flush. The only state the app
 * keeps outside the service is the panel preference and the dev user id.
 */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { mountHistoryPage } from "./pages/history.js";
import { mountResultSetPage } from "./pages/resultset.js";
import { mountSearchPage } from "./pages/search.js";
import { BrowserRecorder } from "./recorder.js";

const USER_KEY = "searchtrail.devuser";
const TICK_INTERVAL_MS = 30_000;

function freshSessionId(): string {
  if (typeof crypto !== "undefined" && crypto.randomUUID) {
    return crypto.randomUUID();
  }
  return `web-${Date.now()}-${Math.floor(Math.random() * 1e6)}`;
}

function boot(): void {
  const app = document.getElementById("app");
  if (!app) {
    return;
  }

  let userId = Number(localStorage.getItem(USER_KEY) ?? "1");
  if (!Number.isInteger(userId) || userId < 1) {
    userId = 1;
  }
  let api = new ApiClient("", userId);
  let recorder = new BrowserRecorder(api, freshSessionId());
  let ticker = startTicker();

  function startTicker(): ReturnType<typeof setInterval> {
    return setInterval(() => {
      void recorder.tick(Date.now());
    }, TICK_INTERVAL_MS);
  }

  const userInput = el("input", {
    class: "login-user",
    type: "number",
    min: "1",
    value: String(userId),
  });
  const userButton = el("button", { class: "login-apply" }, "Switch user");
  userButton.addEventListener("click", () => {
    const next = Number(userInput.value);
    if (!Number.isInteger(next) || next < 1 || next === userId) {
      return;
    }
    // switching identity ends the old session cleanly before rebinding
    void recorder.endSession().finally(() => {
      clearInterval(ticker);
      userId = next;
      localStorage.setItem(USER_KEY, String(userId));
      api = new ApiClient("", userId);
      recorder = new BrowserRecorder(api, freshSessionId());
      ticker = startTicker();
      route();
    });
  });

  const nav = el(
    "nav",
    { class: "top-nav" },
    el("a", { href: "#/search" }, "Search"),
    el("a", { href: "#/history" }, "Explore history"),
    el("span", { class: "login-box" }, "User: ", userInput, userButton),
  );
  const outlet = el("main", { class: "outlet" });
  clear(app);
  app.append(nav, outlet);

  function route(): void {
    const hash = window.location.hash || "#/search";
    const setMatch = /^#\/set\/(\d+)$/.exec(hash);
    if (setMatch) {
      mountResultSetPage(outlet, api, Number(setMatch[1]));
    } else if (hash === "#/history") {
      mountHistoryPage(outlet, api);
    } else {
      mountSearchPage(outlet, api, recorder);
    }
  }

  window.addEventListener("hashchange", route);
  window.addEventListener("beforeunload", () => {
    void recorder.endSession();
  });
  route();
}

boot();
