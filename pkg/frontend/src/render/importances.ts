import { escapeHtml, formatSignedMoney } from "../format";
import { ExplanationReport, FeatureImportance } from "../types";

/** Display order: strongest effects first, name as a stable tiebreak. */
export function sortedImportances(report: ExplanationReport): FeatureImportance[] {
  return [...report.importances].sort(
    (a, b) => Math.abs(b.value) - Math.abs(a.value) || a.feature.localeCompare(b.feature),
  );
}

/**
 * Per-feature monetary effects, sorted by magnitude, with the engine's sign
 * convention quoted as the caption.
 */
export function renderImportances(report: ExplanationReport): string {
  const parts: string[] = [];
  parts.push(`<table class="importances">`);
  parts.push(`<caption>${escapeHtml(report.sign_convention)}</caption>`);
  parts.push(`<thead><tr><th>variable</th><th>effect on estimate</th></tr></thead>`);
  parts.push(`<tbody>`);
  for (const row of sortedImportances(report)) {
    const sign = row.value < 0 ? "neg" : "pos";
    parts.push(
      `<tr><td class="feature">${escapeHtml(row.feature)}</td>` +
        `<td class="effect ${sign}">${formatSignedMoney(row.value)}</td></tr>`,
    );
  }
  parts.push(`</tbody>`);
  parts.push(`</table>`);
  return parts.join("\n");
}
