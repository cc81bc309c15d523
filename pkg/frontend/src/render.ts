// HTML-string renderers for everything dynamic. Pure functions over the
// service response so the markup is testable without a browser. Hits are
// rendered strictly in response order.

import { QueryHit, QueryLatency, QueryResponse } from "./api.js";
import { formatAngle, formatDistance, formatMs } from "./format.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderHits(hits: QueryHit[]): string {
  if (hits.length === 0) {
    return '<p class="empty">no results</p>';
  }
  return hits
    .map((h, i) => `
      <figure class="hit">
        <img src="${escapeHtml(h.thumbnail_url)}" alt="${escapeHtml(h.id)}" loading="lazy">
        <figcaption>
          <span class="rank">#${i + 1}</span>
          <span class="label">${escapeHtml(h.label)}</span>
          <span class="distance">${formatDistance(h.distance)}</span>
        </figcaption>
      </figure>`)
    .join("\n");
}

export function renderAngle(response: QueryResponse, useOad: boolean): string {
  if (!useOad) {
    return "correction off";
  }
  return `predicted rotation ${formatAngle(response.predicted_angle_deg)}`;
}

export function renderLatency(latency: QueryLatency): string {
  return [
    `orientation ${formatMs(latency.orientation)}`,
    `extraction ${formatMs(latency.extraction)}`,
    `scan ${formatMs(latency.scan)}`,
  ].join(" · ");
}

export function renderBanner(message: string): string {
  return `<span class="banner-text">${escapeHtml(message)}</span>` +
    '<button type="button" id="retry">retry</button>';
}
