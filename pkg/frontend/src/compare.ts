/**
 * Result-set diffing against a past search, computed client-side from the
 * past set's stored urls. A current result is "new" exactly when its
 * comparison key is absent from the past set; only the first n current
 * results are judged, n being the size of the past set.
 */

// scheme://host forms; host and scheme are case-insensitive per RFC 3986
const WITH_AUTHORITY = /^([a-zA-Z][a-zA-Z0-9+.-]*):\/\/([^/?#]*)([\s\S]*)$/;
const SCHEME_ONLY = /^([a-zA-Z][a-zA-Z0-9+.-]*):([\s\S]*)$/;

/** Identity form of a url: trimmed, scheme and host lowercased. */
export function normalizeUrl(url: string): string {
  const cleaned = url.trim();
  const withAuthority = WITH_AUTHORITY.exec(cleaned);
  if (withAuthority) {
    const [, scheme, host, rest] = withAuthority;
    return `${scheme.toLowerCase()}://${host.toLowerCase()}${rest}`;
  }
  const schemeOnly = SCHEME_ONLY.exec(cleaned);
  if (schemeOnly) {
    return `${schemeOnly[1].toLowerCase()}:${schemeOnly[2]}`;
  }
  return cleaned;
}

/** Membership key for diffing: identity form with trailing slashes stripped. */
export function comparisonKey(url: string): string {
  return normalizeUrl(url).replace(/\/+$/, "");
}

export interface ComparisonItem {
  url: string;
  title: string;
  isNew: boolean;
}

export interface Comparison {
  pastResultSetId: number;
  /** Number of resources stored for the past set. */
  depth: number;
  items: ComparisonItem[];
}

export function compareOverTime(
  current: { url: string; title: string }[],
  pastUrls: string[],
  pastResultSetId: number,
): Comparison {
  const pastKeys = new Set(pastUrls.map(comparisonKey));
  const depth = pastUrls.length;
  const items = current.slice(0, depth).map(({ url, title }) => ({
    url,
    title,
    isNew: !pastKeys.has(comparisonKey(url)),
  }));
  return { pastResultSetId, depth, items };
}
