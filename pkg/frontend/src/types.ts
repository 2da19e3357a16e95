// Payload shapes for the /v1 service API. Field names stay snake_case to
// mirror the JSON documents; nothing here is recomputed client-side.

export interface HouseholdSummary {
  id: string;
  predicted_income: number;
  observed_formal_income: number | null;
  collection_date: string; // ISO date
  missing_count: number;
}

export interface HouseholdsPage {
  total: number;
  offset: number;
  limit: number;
  households: HouseholdSummary[];
}

export interface FeatureImportance {
  feature: string;
  value: number; // signed monetary effect
}

export interface GroupImportance {
  group: string;
  label: string;
  value: number;
}

export interface GroupPercentile {
  group: string;
  value: number; // 0..100
}

export interface ReportWarning {
  code: string;
  feature: string;
  rule: number;
  cell: string | null;
  count: number;
}

export interface ExplanationReport {
  report_version: number;
  household_id: string;
  seed: number;
  predicted_income: number;
  observed_formal_income: number | null;
  collection_date: string;
  importances: FeatureImportance[];
  group_importances: GroupImportance[];
  percentiles: GroupPercentile[] | null; // null unless a contrast cache was used
  missing_variables: string[];
  warnings: ReportWarning[];
  fingerprint: string;
  sign_convention: string;
}

export interface HistogramFocal {
  household_id: string;
  predicted_income: number;
  predicted_bin: number;
  observed_formal_income: number | null;
  observed_bin: number | null;
}

export interface HistogramPayload {
  payload_version: number;
  n: number;
  bin_edges: number[]; // length = counts.length + 1
  counts: number[];
  focal: HistogramFocal | null;
  fingerprint: string;
}

export interface RadarAxis {
  group: string;
  label: string;
  value: number;
  percentile: number;
  contrast_median: number;
}

export interface RadarPayload {
  payload_version: number;
  household_id: string;
  axes: RadarAxis[];
  fingerprint: string;
}

export interface ErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}

export type Algorithm = "univariate" | "conditional" | "bivariate" | "contrastive";

export const ALGORITHMS: Algorithm[] = ["univariate", "conditional", "bivariate", "contrastive"];
