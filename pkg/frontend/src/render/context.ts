import { daysBetween, escapeHtml, formatDate, formatMoney } from "../format";
import { humanizeWarning } from "../warnings";
import { ExplanationReport } from "../types";

export interface ContextOptions {
  today: string; // ISO date, injected so rendering stays pure
  staleAfterDays: number;
}

export const DEFAULT_STALE_AFTER_DAYS = 365;

/**
 * Context card: when the household was surveyed, which variables are missing,
 * and any estimation notes from resampling fallbacks.
 */
export function renderContext(report: ExplanationReport, opts: ContextOptions): string {
  const stale = daysBetween(report.collection_date, opts.today) > opts.staleAfterDays;
  const parts: string[] = [];
  parts.push(`<section class="context-card">`);
  parts.push(`<h3>household ${escapeHtml(report.household_id)}</h3>`);
  parts.push(`<dl>`);
  parts.push(`<dt>surveyed</dt>`);
  const staleNote = stale
    ? ` <span class="stale-note">older than ${opts.staleAfterDays} days</span>`
    : "";
  parts.push(
    `<dd class="collection-date${stale ? " stale" : ""}">${formatDate(report.collection_date)}${staleNote}</dd>`,
  );
  parts.push(`<dt>estimated income per capita</dt>`);
  parts.push(`<dd class="predicted">${formatMoney(report.predicted_income)}</dd>`);
  parts.push(`<dt>observed formal income</dt>`);
  parts.push(
    report.observed_formal_income === null
      ? `<dd class="observed none">none recorded</dd>`
      : `<dd class="observed">${formatMoney(report.observed_formal_income)}</dd>`,
  );
  parts.push(`</dl>`);

  parts.push(`<h4>missing variables</h4>`);
  if (report.missing_variables.length === 0) {
    parts.push(`<p class="missing none">none</p>`);
  } else {
    parts.push(`<ul class="missing">`);
    for (const name of report.missing_variables) {
      parts.push(`<li>${escapeHtml(name)}</li>`);
    }
    parts.push(`</ul>`);
  }

  parts.push(`<h4>estimation notes</h4>`);
  if (report.warnings.length === 0) {
    parts.push(`<p class="warnings none">none</p>`);
  } else {
    parts.push(`<ul class="warnings">`);
    for (const warning of report.warnings) {
      parts.push(
        `<li data-code="${escapeHtml(warning.code)}">${escapeHtml(humanizeWarning(warning))}</li>`,
      );
    }
    parts.push(`</ul>`);
  }
  parts.push(`</section>`);
  return parts.join("\n");
}
