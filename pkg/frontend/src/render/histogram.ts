import { formatCount, formatMoney } from "../format";
import { HistogramPayload } from "../types";

export interface HistogramLayout {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const HISTOGRAM_LAYOUT: HistogramLayout = {
  width: 640,
  height: 360,
  marginLeft: 56,
  marginRight: 16,
  marginTop: 28,
  marginBottom: 48,
};

const EDGE_LABEL_STEP = 5;

/** Horizontal band of one bin; markers sit at the center of their bin's band. */
export function binSlot(
  layout: HistogramLayout,
  binCount: number,
  index: number,
): { x: number; width: number } {
  const plotWidth = layout.width - layout.marginLeft - layout.marginRight;
  const slotWidth = plotWidth / binCount;
  return { x: layout.marginLeft + index * slotWidth, width: slotWidth };
}

const px = (v: number): string => String(Math.round(v * 100) / 100);

/**
 * Income histogram as standalone SVG. Bar heights come from payload counts,
 * marker positions from the payload's precomputed bin indices; income figures
 * appear only as formatted labels.
 */
export function renderHistogram(
  payload: HistogramPayload,
  layout: HistogramLayout = HISTOGRAM_LAYOUT,
): string {
  const bins = payload.counts.length;
  const plotHeight = layout.height - layout.marginTop - layout.marginBottom;
  const baseY = layout.marginTop + plotHeight;
  const maxCount = Math.max(1, ...payload.counts);
  const parts: string[] = [];

  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" class="histogram" role="img">`,
  );
  const title =
    payload.focal === null
      ? `income distribution, ${formatCount(payload.n)} households`
      : `income distribution, ${formatCount(payload.n)} households, focal ${payload.focal.household_id}`;
  parts.push(`<title>${title}</title>`);

  parts.push(`<g class="bars">`);
  payload.counts.forEach((count, i) => {
    const slot = binSlot(layout, bins, i);
    const h = (count / maxCount) * plotHeight;
    parts.push(
      `<rect class="bar" x="${px(slot.x + 0.5)}" y="${px(baseY - h)}" ` +
        `width="${px(Math.max(0, slot.width - 1))}" height="${px(h)}" data-count="${count}"/>`,
    );
  });
  parts.push(`</g>`);

  // x axis: labelled edges are payload values passed through the formatter
  parts.push(`<g class="axis x">`);
  parts.push(
    `<line x1="${px(layout.marginLeft)}" y1="${px(baseY)}" ` +
      `x2="${px(layout.width - layout.marginRight)}" y2="${px(baseY)}"/>`,
  );
  payload.bin_edges.forEach((edge, i) => {
    if (i % EDGE_LABEL_STEP !== 0 && i !== payload.bin_edges.length - 1) return;
    const x = binSlot(layout, bins, 0).x + i * binSlot(layout, bins, 0).width;
    parts.push(
      `<text class="tick" x="${px(x)}" y="${px(baseY + 16)}" text-anchor="middle">${formatMoney(edge)}</text>`,
    );
  });
  parts.push(
    `<text class="axis-label" x="${px(layout.marginLeft + (layout.width - layout.marginLeft - layout.marginRight) / 2)}" ` +
      `y="${px(layout.height - 8)}" text-anchor="middle">income per capita (currency units)</text>`,
  );
  parts.push(`</g>`);

  parts.push(`<g class="axis y">`);
  parts.push(
    `<text class="tick" x="${px(layout.marginLeft - 8)}" y="${px(baseY)}" text-anchor="end">0</text>`,
  );
  parts.push(
    `<text class="tick" x="${px(layout.marginLeft - 8)}" y="${px(layout.marginTop + 4)}" text-anchor="end">${formatCount(maxCount)}</text>`,
  );
  parts.push(
    `<text class="axis-label" x="${px(layout.marginLeft - 40)}" y="${px(layout.marginTop + plotHeight / 2)}" ` +
      `text-anchor="middle" transform="rotate(-90 ${px(layout.marginLeft - 40)} ${px(layout.marginTop + plotHeight / 2)})">households</text>`,
  );
  parts.push(`</g>`);

  if (payload.focal !== null) {
    const focal = payload.focal;
    parts.push(`<g class="markers">`);
    parts.push(
      marker(layout, bins, focal.predicted_bin, "predicted", formatMoney(focal.predicted_income)),
    );
    if (focal.observed_bin !== null && focal.observed_formal_income !== null) {
      parts.push(
        marker(layout, bins, focal.observed_bin, "observed", formatMoney(focal.observed_formal_income)),
      );
    }
    parts.push(`</g>`);
    parts.push(renderLegend(layout, focal.observed_formal_income !== null));
  }

  parts.push(`</svg>`);
  return parts.join("\n");
}

function marker(
  layout: HistogramLayout,
  bins: number,
  bin: number,
  kind: "predicted" | "observed",
  label: string,
): string {
  const slot = binSlot(layout, bins, bin);
  const x = slot.x + slot.width / 2;
  const top = layout.marginTop - 6;
  const baseY = layout.height - layout.marginBottom;
  const anchor = kind === "predicted" ? "end" : "start";
  const dx = kind === "predicted" ? -4 : 4;
  return (
    `<g class="marker ${kind}" data-bin="${bin}">` +
    `<line x1="${px(x)}" y1="${px(top)}" x2="${px(x)}" y2="${px(baseY)}"/>` +
    `<text x="${px(x + dx)}" y="${px(top + 10)}" text-anchor="${anchor}">${label}</text>` +
    `</g>`
  );
}

function renderLegend(layout: HistogramLayout, hasObserved: boolean): string {
  const x = layout.marginLeft + 8;
  const rows = [`<g class="legend" transform="translate(${px(x)} ${px(layout.marginTop)})">`];
  rows.push(
    `<g class="entry predicted"><line x1="0" y1="6" x2="18" y2="6"/>` +
      `<text x="24" y="10">estimated income (model)</text></g>`,
  );
  if (hasObserved) {
    rows.push(
      `<g class="entry observed" transform="translate(0 18)"><line x1="0" y1="6" x2="18" y2="6"/>` +
        `<text x="24" y="10">observed formal income</text></g>`,
    );
  }
  rows.push(`</g>`);
  return rows.join("");
}
