import { ApiError } from "./api";
import {
  ExplanationReport,
  HistogramPayload,
  HouseholdsPage,
  RadarPayload,
} from "./types";

export type RadarSeries = "percentiles" | "values";

export type FocalSlot = "report" | "histogram" | "radar";

export interface Banner {
  code: string;
  householdId: string | null;
  message: string;
}

export interface PendingFlags {
  households: boolean;
  report: boolean;
  histogram: boolean;
  radar: boolean;
}

/**
 * Everything a render needs. Views are pure functions of this object; focal
 * payloads are kept verbatim as the service sent them.
 */
export interface ViewModel {
  generation: number;
  households: HouseholdsPage | null;
  focalId: string | null;
  report: ExplanationReport | null;
  histogram: HistogramPayload | null;
  radar: RadarPayload | null;
  pending: PendingFlags;
  banners: Banner[];
  radarSeries: RadarSeries;
}

export function initialViewModel(): ViewModel {
  return {
    generation: 0,
    households: null,
    focalId: null,
    report: null,
    histogram: null,
    radar: null,
    pending: { households: false, report: false, histogram: false, radar: false },
    banners: [],
    radarSeries: "percentiles",
  };
}

// Each transition returns a fresh ViewModel; an ignored event returns the
// input unchanged so callers can cheaply detect no-ops by identity.

export function beginHouseholds(vm: ViewModel): ViewModel {
  return { ...vm, pending: { ...vm.pending, households: true } };
}

export function receiveHouseholds(vm: ViewModel, page: HouseholdsPage): ViewModel {
  return { ...vm, households: page, pending: { ...vm.pending, households: false } };
}

export function failHouseholds(vm: ViewModel, banner: Banner): ViewModel {
  return {
    ...vm,
    pending: { ...vm.pending, households: false },
    banners: [...vm.banners, banner],
  };
}

/** Switch focal household: bump the generation and drop the old focal state. */
export function selectFocal(vm: ViewModel, householdId: string): ViewModel {
  return {
    ...vm,
    generation: vm.generation + 1,
    focalId: householdId,
    report: null,
    histogram: null,
    radar: null,
    pending: { ...vm.pending, report: true, histogram: true, radar: true },
    banners: [],
  };
}

/** Mark a re-run of the explanation; refused while one is already in flight. */
export function beginExplanation(vm: ViewModel): ViewModel {
  if (vm.focalId === null || vm.pending.report) return vm;
  return { ...vm, pending: { ...vm.pending, report: true } };
}

export function receiveReport(vm: ViewModel, generation: number, report: ExplanationReport): ViewModel {
  if (generation !== vm.generation) return vm; // superseded focal
  return { ...vm, report, pending: { ...vm.pending, report: false } };
}

export function receiveHistogram(vm: ViewModel, generation: number, payload: HistogramPayload): ViewModel {
  if (generation !== vm.generation) return vm;
  return { ...vm, histogram: payload, pending: { ...vm.pending, histogram: false } };
}

export function receiveRadar(vm: ViewModel, generation: number, payload: RadarPayload): ViewModel {
  if (generation !== vm.generation) return vm;
  return { ...vm, radar: payload, pending: { ...vm.pending, radar: false } };
}

export function failFocalRequest(
  vm: ViewModel,
  generation: number,
  slot: FocalSlot,
  banner: Banner,
): ViewModel {
  if (generation !== vm.generation) return vm;
  return {
    ...vm,
    pending: { ...vm.pending, [slot]: false },
    banners: [...vm.banners, banner],
  };
}

export function toggleRadarSeries(vm: ViewModel): ViewModel {
  return { ...vm, radarSeries: vm.radarSeries === "percentiles" ? "values" : "percentiles" };
}

export function dismissBanner(vm: ViewModel, index: number): ViewModel {
  if (index < 0 || index >= vm.banners.length) return vm;
  return { ...vm, banners: vm.banners.filter((_, i) => i !== index) };
}

/** Service failure to user-facing banner; BUDGET gets an actionable hint. */
export function bannerFor(householdId: string | null, err: unknown): Banner {
  if (err instanceof ApiError) {
    let message = err.message;
    if (err.code === "BUDGET") {
      message += "; the univariate algorithm needs far fewer evaluations and should fit";
    }
    return { code: err.code, householdId, message };
  }
  const message = err instanceof Error ? err.message : String(err);
  return { code: "NETWORK", householdId, message };
}
