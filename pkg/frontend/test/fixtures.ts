import { readFileSync } from "node:fs";
import { FixtureBundle } from "../src/fixtures";
import {
  ExplanationReport,
  HistogramPayload,
  HouseholdsPage,
  RadarPayload,
} from "../src/types";

// Payloads captured once from the running service; tests treat them as the
// ground truth the views must reproduce.

function load<T>(name: string): T {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}

export const householdsPage = load<HouseholdsPage>("households");
export const contrastiveReport = load<ExplanationReport>("report_contrastive");
export const univariateReport = load<ExplanationReport>("report_univariate");
export const histogramFocal = load<HistogramPayload>("histogram_focal");
export const histogramSecond = load<HistogramPayload>("histogram_second");
export const histogramNoObserved = load<HistogramPayload>("histogram_no_observed");
export const histogramOverview = load<HistogramPayload>("histogram_overview");
export const radarPayload = load<RadarPayload>("radar");
export const radarSecond = load<RadarPayload>("radar_second");

export function fixtureBundle(): FixtureBundle {
  return {
    households: householdsPage,
    reports: {
      [contrastiveReport.household_id]: contrastiveReport,
      [univariateReport.household_id]: univariateReport,
    },
    histograms: {
      HH00004: histogramFocal,
      HH00009: histogramSecond,
      HH00000: histogramNoObserved,
    },
    overview: histogramOverview,
    radars: {
      [radarPayload.household_id]: radarPayload,
      [radarSecond.household_id]: radarSecond,
    },
  };
}
