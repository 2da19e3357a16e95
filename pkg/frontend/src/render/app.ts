import { escapeHtml, formatCount, formatMoney } from "../format";
import { Banner, ViewModel } from "../state";
import { HouseholdsPage } from "../types";
import { ContextOptions, renderContext } from "./context";
import { renderHistogram } from "./histogram";
import { renderImportances } from "./importances";
import { renderRadar } from "./radar";

export type RenderOptions = ContextOptions;

/**
 * Whole-page render: banners, household picker, then distribution and context
 * on the left, radar and importances on the right. Pure function of the
 * ViewModel; event wiring is the host page's concern.
 */
export function renderApp(vm: ViewModel, opts: RenderOptions): string {
  const parts: string[] = [];
  parts.push(`<main class="caseworker">`);
  parts.push(renderBanners(vm.banners));
  parts.push(renderPicker(vm.households, vm.focalId, vm.pending.households));

  parts.push(`<div class="panels">`);
  parts.push(`<section class="panel left">`);
  parts.push(block(vm.pending.histogram, vm.histogram, "distribution", renderHistogram));
  parts.push(
    block(vm.pending.report, vm.report, "context", (report) => renderContext(report, opts)),
  );
  parts.push(`</section>`);

  parts.push(`<section class="panel right">`);
  parts.push(seriesToggle(vm));
  parts.push(block(vm.pending.radar, vm.radar, "radar", (radar) => renderRadar(radar, vm.radarSeries)));
  parts.push(block(vm.pending.report, vm.report, "importances", renderImportances));
  parts.push(`</section>`);
  parts.push(`</div>`);

  parts.push(`</main>`);
  return parts.join("\n");
}

function block<T>(
  pending: boolean,
  payload: T | null,
  name: string,
  render: (payload: T) => string,
): string {
  if (pending) return `<p class="pending ${name}">loading ${name}...</p>`;
  if (payload === null) return `<p class="empty ${name}">select a household</p>`;
  return render(payload);
}

function renderBanners(banners: Banner[]): string {
  if (banners.length === 0) return `<div class="banners empty"></div>`;
  const parts = [`<div class="banners">`];
  banners.forEach((banner, i) => {
    const who = banner.householdId === null ? "" : `household ${escapeHtml(banner.householdId)}: `;
    parts.push(
      `<p class="banner" data-code="${escapeHtml(banner.code)}" data-index="${i}">` +
        `${who}${escapeHtml(banner.message)}</p>`,
    );
  });
  parts.push(`</div>`);
  return parts.join("\n");
}

function renderPicker(page: HouseholdsPage | null, focalId: string | null, pending: boolean): string {
  if (pending) return `<p class="pending households">loading households...</p>`;
  if (page === null) return `<nav class="households empty"></nav>`;
  const parts = [`<nav class="households" data-total="${page.total}">`];
  for (const hh of page.households) {
    const selected = hh.id === focalId ? " selected" : "";
    const badge =
      hh.missing_count > 0
        ? ` <span class="missing-badge">${formatCount(hh.missing_count)} missing</span>`
        : "";
    parts.push(
      `<button class="household${selected}" data-id="${escapeHtml(hh.id)}">` +
        `${escapeHtml(hh.id)} (${formatMoney(hh.predicted_income)})${badge}</button>`,
    );
  }
  parts.push(`</nav>`);
  return parts.join("\n");
}

function seriesToggle(vm: ViewModel): string {
  const next = vm.radarSeries === "percentiles" ? "values" : "percentiles";
  const label =
    vm.radarSeries === "percentiles" ? "show group values" : "show percentile ranks";
  return `<button class="series-toggle" data-next="${next}">${label}</button>`;
}
