import type { ExtractResponse, SpanJson } from "./types";

/**
 * Slice by Unicode code points, not UTF-16 units. Server offsets count
 * code points, so astral characters before a span must not shift it.
 */
export function codePointSlice(text: string, start: number, end: number): string {
  return Array.from(text).slice(start, end).join("");
}

export function codePointLength(text: string): number {
  return Array.from(text).length;
}

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Thrown when a span does not fit the article; the caller shows a banner. */
export class SpanBoundsError extends Error {
  constructor(span: SpanJson, length: number) {
    super(`span [${span.start}, ${span.end}) out of bounds for article of length ${length}`);
    this.name = "SpanBoundsError";
  }
}

/**
 * Article text with each server span wrapped in a <mark> carrying its
 * type's color token. Slicing is strictly by the server-provided
 * code-point offsets; nothing is re-located client-side.
 */
export function renderHighlightedArticle(response: ExtractResponse): string {
  const { article, spans, colors } = response.annotated;
  const length = codePointLength(article);
  const ordered = [...spans].sort((a, b) => a.start - b.start);
  let cursor = 0;
  const parts: string[] = [];
  for (const span of ordered) {
    if (span.start < cursor || span.end <= span.start || span.end > length) {
      throw new SpanBoundsError(span, length);
    }
    parts.push(escapeHtml(codePointSlice(article, cursor, span.start)));
    const color = colors[span.type] ?? "gray";
    parts.push(
      `<mark class="hl hl-${escapeHtml(color)}" data-type="${escapeHtml(span.type)}">` +
        escapeHtml(codePointSlice(article, span.start, span.end)) +
        "</mark>",
    );
    cursor = span.end;
  }
  parts.push(escapeHtml(codePointSlice(article, cursor, length)));
  return parts.join("");
}

function tableHtml(headers: string[], rows: string[][]): string {
  const head = headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("");
  const body = rows
    .map((row) => `<tr>${row.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
    .join("");
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderEntityTable(response: ExtractResponse): string {
  return tableHtml(
    ["Entity", "Type"],
    response.entity_table.map((row) => [row.text, row.type]),
  );
}

export function renderRelationTable(response: ExtractResponse): string {
  return tableHtml(
    ["Subject", "Relation", "Object"],
    response.relation_table.map((row) => [row.subject, row.relation, row.object]),
  );
}

/** The Article view: highlighted text plus the entity and relation tables. */
export function renderArticleView(response: ExtractResponse): string {
  const highlighted = `<div class="article-text">${renderHighlightedArticle(response)}</div>`;
  if (response.relation_table.length === 0) {
    return `${highlighted}<p class="notice">no relations extracted</p>` +
      renderEntityTable(response) + renderRelationTable(response);
  }
  return highlighted + renderEntityTable(response) + renderRelationTable(response);
}

export function renderRawView(response: ExtractResponse): string {
  return `<pre class="raw">${escapeHtml(response.raw)}</pre>`;
}

export function renderJsonView(response: ExtractResponse): string {
  return `<pre class="json">${escapeHtml(JSON.stringify(response.relations, null, 2))}</pre>`;
}
