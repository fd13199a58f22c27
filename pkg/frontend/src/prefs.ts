/**
 * History-panel preference, persisted in browser-local storage per user id
 * and read back at page load. The panel starts hidden for a user who has
 * never toggled it.
 */

const KEY_PREFIX = "searchtrail.panel.";

export interface PanelPreference {
  userId: number;
  visible: boolean;
}

function keyFor(userId: number): string {
  return KEY_PREFIX + String(userId);
}

export function loadPanelPreference(userId: number): PanelPreference {
  const raw = localStorage.getItem(keyFor(userId));
  if (raw !== null) {
    try {
      const parsed = JSON.parse(raw);
      if (typeof parsed.visible === "boolean") {
        return { userId, visible: parsed.visible };
      }
    } catch {
      // fall through to the default below
    }
  }
  return { userId, visible: false };
}

export function savePanelPreference(pref: PanelPreference): void {
  localStorage.setItem(keyFor(pref.userId), JSON.stringify({ visible: pref.visible }));
}
