import { parseCsv } from './csv.js';

// Reports arrive as CSV bytes; the table view parses a copy for display
// while downloads hand the original bytes through untouched, so a saved
// file is identical to what the CLI would have written.

export interface ReportTable {
  header: string[];
  rows: string[][];
}

export function parseReport(text: string): ReportTable[] {
  // The full report is two tables separated by a blank line.
  return text
    .split('\n\n')
    .filter((section) => section.trim() !== '')
    .map((section) => {
      const rows = parseCsv(section);
      return { header: rows[0] ?? [], rows: rows.slice(1) };
    });
}

export type SortDirection = 'asc' | 'desc';

export function sortRows(
  rows: string[][],
  column: number,
  direction: SortDirection,
): string[][] {
  const sign = direction === 'asc' ? 1 : -1;
  return [...rows].sort((a, b) => {
    const left = a[column] ?? '';
    const right = b[column] ?? '';
    const leftNum = Number(left);
    const rightNum = Number(right);
    const bothNumeric =
      left !== '' && right !== '' && !isNaN(leftNum) && !isNaN(rightNum);
    if (bothNumeric) return sign * (leftNum - rightNum);
    return sign * left.localeCompare(right);
  });
}

export function tableToHtml(table: ReportTable, sortColumn = -1): string {
  const head = table.header
    .map(
      (cell, index) =>
        `<th data-col="${index}" class="${index === sortColumn ? 'sorted' : ''}">${cell}</th>`,
    )
    .join('');
  const body = table.rows
    .map((row) => `<tr>${row.map((cell) => `<td>${cell}</td>`).join('')}</tr>`)
    .join('');
  return `<table class="report"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

/** Exact bytes in, exact bytes out: the blob wraps the served payload. */
export function reportBlob(bytes: Uint8Array): Blob {
  return new Blob([bytes as BlobPart], { type: 'text/csv' });
}

export function triggerDownload(bytes: Uint8Array, filename: string): void {
  const url = URL.createObjectURL(reportBlob(bytes));
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}
