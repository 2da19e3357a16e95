import { ReportWarning } from "./types";
import { formatCount } from "./format";

// Human text for engine fallback codes. In every fallback the engine redraws
// the value from all surveyed households instead of the matched subgroup, so
// the estimate stands but leans on a broader reference pool.
export const WARNING_TEXT: Record<string, string> = {
  UNMATCHED_CELL:
    "this household matched no subgroup of the survey rule, so the value was redrawn from all households",
  EMPTY_SUBSET:
    "no surveyed household shares this household's subgroup, so the value was redrawn from all households",
  NO_ADMISSIBLE_VALUE:
    "households in the matching subgroup have no recorded value here, so the value was redrawn from all households",
};

export function humanizeWarning(warning: ReportWarning): string {
  const text = WARNING_TEXT[warning.code] ?? `fallback ${warning.code}`;
  const where = warning.cell === null ? "" : ` [${warning.cell}]`;
  const times = warning.count === 1 ? "1 draw" : `${formatCount(warning.count)} draws`;
  return `${warning.feature}${where}: ${text} (${times})`;
}
