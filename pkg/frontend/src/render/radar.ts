import { formatPercentile, formatSignedMoney } from "../format";
import { escapeHtml } from "../format";
import { RadarSeries } from "../state";
import { RadarPayload } from "../types";

export interface RadarLayout {
  size: number; // square viewBox side
  radius: number;
  labelOffset: number;
}

export const RADAR_LAYOUT: RadarLayout = { size: 440, radius: 150, labelOffset: 22 };

export function radarCenter(layout: RadarLayout): { x: number; y: number } {
  return { x: layout.size / 2, y: layout.size / 2 };
}

/** Axis i of k points up for i=0 and proceeds clockwise. */
export function axisAngle(count: number, index: number): number {
  return -Math.PI / 2 + (2 * Math.PI * index) / count;
}

export function radialPoint(
  cx: number,
  cy: number,
  r: number,
  angle: number,
): { x: number; y: number } {
  return { x: cx + r * Math.cos(angle), y: cy + r * Math.sin(angle) };
}

const px = (v: number): string => String(Math.round(v * 1000) / 1000);

/**
 * Radar over the payload's feature groups, one axis per group.
 *
 * "percentiles" plots the focal's percentile per axis on a 0..100 scale, so 50
 * sits at mid-radius; the contrast set's median is the 50th percentile by
 * definition and appears as the mid polygon. "values" plots the focal group
 * values against the contrast medians on a shared monetary scale.
 */
export function renderRadar(
  payload: RadarPayload,
  series: RadarSeries = "percentiles",
  layout: RadarLayout = RADAR_LAYOUT,
): string {
  const k = payload.axes.length;
  const { x: cx, y: cy } = radarCenter(layout);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.size} ${layout.size}" ` +
      `class="radar ${series}" role="img" data-axes="${k}">`,
  );
  parts.push(`<title>group importance radar for ${escapeHtml(payload.household_id)}</title>`);
  if (k === 0) {
    parts.push(`<text x="${px(cx)}" y="${px(cy)}" text-anchor="middle">no groups</text>`);
    parts.push(`</svg>`);
    return parts.join("\n");
  }

  parts.push(`<g class="grid">`);
  for (const frac of [0.25, 0.5, 0.75, 1]) {
    const ring = ringPoints(layout, k, frac);
    const mid = frac === 0.5 && series === "percentiles" ? " contrast-median" : "";
    parts.push(`<polygon class="ring${mid}" points="${ring}"/>`);
  }
  for (let i = 0; i < k; i++) {
    const outer = radialPoint(cx, cy, layout.radius, axisAngle(k, i));
    parts.push(
      `<line class="spoke" x1="${px(cx)}" y1="${px(cy)}" x2="${px(outer.x)}" y2="${px(outer.y)}"/>`,
    );
  }
  parts.push(`</g>`);

  payload.axes.forEach((axis, i) => {
    const at = radialPoint(cx, cy, layout.radius + layout.labelOffset, axisAngle(k, i));
    parts.push(
      `<text class="axis-label" x="${px(at.x)}" y="${px(at.y)}" text-anchor="middle" ` +
        `data-group="${escapeHtml(axis.group)}">${escapeHtml(axis.label)}</text>`,
    );
  });

  if (series === "percentiles") {
    const fractions = payload.axes.map((a) => a.percentile / 100);
    parts.push(seriesPolygon(layout, k, fractions, "focal"));
    payload.axes.forEach((axis, i) => {
      parts.push(
        vertexMarker(layout, k, i, axis.percentile / 100, axis.group, formatPercentile(axis.percentile)),
      );
    });
  } else {
    // shared linear scale over both monetary series, zero included
    const values = payload.axes.map((a) => a.value);
    const medians = payload.axes.map((a) => a.contrast_median);
    const lo = Math.min(0, ...values, ...medians);
    const hi = Math.max(0, ...values, ...medians);
    const span = hi - lo;
    const frac = (v: number): number => (span === 0 ? 0.5 : (v - lo) / span);
    parts.push(seriesPolygon(layout, k, medians.map(frac), "contrast"));
    parts.push(seriesPolygon(layout, k, values.map(frac), "focal"));
    payload.axes.forEach((axis, i) => {
      parts.push(
        vertexMarker(layout, k, i, frac(axis.value), axis.group, formatSignedMoney(axis.value)),
      );
    });
  }

  parts.push(`</svg>`);
  return parts.join("\n");
}

function ringPoints(layout: RadarLayout, k: number, frac: number): string {
  const { x: cx, y: cy } = radarCenter(layout);
  const pts: string[] = [];
  for (let i = 0; i < k; i++) {
    const p = radialPoint(cx, cy, layout.radius * frac, axisAngle(k, i));
    pts.push(`${px(p.x)},${px(p.y)}`);
  }
  return pts.join(" ");
}

function seriesPolygon(layout: RadarLayout, k: number, fractions: number[], name: string): string {
  const { x: cx, y: cy } = radarCenter(layout);
  const pts = fractions
    .map((f, i) => {
      const p = radialPoint(cx, cy, layout.radius * f, axisAngle(k, i));
      return `${px(p.x)},${px(p.y)}`;
    })
    .join(" ");
  return `<polygon class="series ${name}" points="${pts}"/>`;
}

function vertexMarker(
  layout: RadarLayout,
  k: number,
  index: number,
  fraction: number,
  group: string,
  label: string,
): string {
  const { x: cx, y: cy } = radarCenter(layout);
  const p = radialPoint(cx, cy, layout.radius * fraction, axisAngle(k, index));
  return (
    `<g class="vertex" data-group="${escapeHtml(group)}">` +
    `<circle cx="${px(p.x)}" cy="${px(p.y)}" r="3"/>` +
    `<text x="${px(p.x + 6)}" y="${px(p.y - 6)}">${label}</text>` +
    `</g>`
  );
}
