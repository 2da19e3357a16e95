import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api";
import { fixtureFetch } from "../src/fixtures";
import { formatMoney, formatPercentile, formatSignedMoney } from "../src/format";
import { renderApp } from "../src/render/app";
import { initialViewModel, selectFocal } from "../src/state";
import { Store } from "../src/store";
import { ViewModel } from "../src/state";
import {
  contrastiveReport,
  fixtureBundle,
  histogramFocal,
  histogramSecond,
  radarPayload,
  radarSecond,
  univariateReport,
} from "./fixtures";
import { markerBinAndX } from "./svg";

const OPTS = { today: "2026-08-22", staleAfterDays: 3650 };

async function readyStore(focal: string): Promise<Store> {
  const store = new Store(new ApiClient("", fixtureFetch(fixtureBundle())), () => {});
  await store.loadHouseholds();
  await store.selectHousehold(focal);
  return store;
}

describe("page composition", () => {
  it("renders the contrastive workspace: golden snapshot 1", async () => {
    const store = await readyStore("HH00004");
    const html = renderApp(store.state, OPTS);
    // radar axis count and marker bins must match the payloads
    expect(html).toContain(`data-axes="${radarPayload.axes.length}"`);
    expect(markerBinAndX(html, "predicted").bin).toBe(histogramFocal.focal!.predicted_bin);
    expect(markerBinAndX(html, "observed").bin).toBe(histogramFocal.focal!.observed_bin);
    expect(html).toMatchSnapshot();
  });

  it("renders the group-value radar view: golden snapshot 2", async () => {
    const store = await readyStore("HH00004");
    store.toggleSeries();
    const html = renderApp(store.state, OPTS);
    expect(html).toContain(`data-axes="${radarPayload.axes.length}"`);
    for (const axis of radarPayload.axes) {
      expect(html).toContain(formatSignedMoney(axis.value));
    }
    expect(html).toMatchSnapshot();
  });

  it("renders a household with missing data: golden snapshot 3", async () => {
    const store = await readyStore("HH00009");
    const html = renderApp(store.state, OPTS);
    expect(html).toContain(`data-axes="${radarSecond.axes.length}"`);
    expect(markerBinAndX(html, "predicted").bin).toBe(histogramSecond.focal!.predicted_bin);
    expect(markerBinAndX(html, "observed").bin).toBe(histogramSecond.focal!.observed_bin);
    expect(html).toContain("livestock_count");
    expect(html).toMatchSnapshot();
  });
});

describe("displayed numbers equal payload values after formatting", () => {
  it("covers incomes, effects, and percentiles on the full page", async () => {
    const store = await readyStore("HH00004");
    const html = renderApp(store.state, OPTS);
    const focal = histogramFocal.focal!;
    expect(html).toContain(formatMoney(focal.predicted_income));
    expect(html).toContain(formatMoney(focal.observed_formal_income!));
    for (const row of contrastiveReport.importances) {
      expect(html).toContain(formatSignedMoney(row.value));
    }
    for (const axis of radarPayload.axes) {
      expect(html).toContain(formatPercentile(axis.percentile));
      expect(html).toContain(axis.label);
    }
    expect(html).toContain(contrastiveReport.sign_convention);
  });
});

describe("pending and error states", () => {
  it("shows loading placeholders while focal requests are in flight", () => {
    const vm: ViewModel = selectFocal(initialViewModel(), "HH00004");
    const html = renderApp(vm, OPTS);
    expect(html).toContain("loading distribution");
    expect(html).toContain("loading context");
    expect(html).toContain("loading radar");
    expect(html).toContain("loading importances");
  });

  it("banners unknown households with their id", async () => {
    const store = await readyStore("HH00404");
    const html = renderApp(store.state, OPTS);
    expect(html).toContain('data-code="UNKNOWN_HOUSEHOLD"');
    expect(html).toContain("HH00404");
  });

  it("marks the selected household in the picker", async () => {
    const store = await readyStore("HH00004");
    const html = renderApp(store.state, OPTS);
    expect(html).toContain('class="household selected" data-id="HH00004"');
  });

  it("keeps rendering the report for households without percentile data", async () => {
    const store = await readyStore("HH00009");
    expect(univariateReport.percentiles).toBeNull();
    const html = renderApp(store.state, OPTS);
    expect(html).toContain("none"); // missing variables section still renders
    expect(html).toContain(formatSignedMoney(univariateReport.importances[0]!.value));
  });
});
