import { FetchLike } from "./api";
import {
  ExplanationReport,
  HistogramPayload,
  HouseholdsPage,
  RadarPayload,
} from "./types";

export interface FixtureBundle {
  households: HouseholdsPage;
  reports: Record<string, ExplanationReport>;
  histograms: Record<string, HistogramPayload>;
  overview: HistogramPayload; // income distribution with no focal
  radars: Record<string, RadarPayload>;
}

/**
 * Fixture mode: a FetchLike that answers the /v1 routes from canned payloads,
 * so every view renders with the service absent. Payloads are served verbatim;
 * pagination parameters are ignored. Unknown households get the same 404 body
 * the service would send.
 */
export function fixtureFetch(bundle: FixtureBundle): FetchLike {
  return async (url, init) => {
    const parsed = new URL(url, "http://fixtures.invalid");
    const path = parsed.pathname;

    if (path === "/v1/households") {
      return ok(bundle.households);
    }
    if (path === "/v1/explain") {
      const body = JSON.parse(String(init?.body ?? "{}")) as { household_id?: string };
      const id = body.household_id ?? "";
      const report = bundle.reports[id];
      return report === undefined ? unknownHousehold(id) : ok(report);
    }
    if (path === "/v1/income-distribution") {
      const id = parsed.searchParams.get("household");
      if (id === null) return ok(bundle.overview);
      const histogram = bundle.histograms[id];
      return histogram === undefined ? unknownHousehold(id) : ok(histogram);
    }
    const radarMatch = path.match(/^\/v1\/radar\/([^/]+)$/);
    if (radarMatch !== null) {
      const id = decodeURIComponent(radarMatch[1] ?? "");
      const radar = bundle.radars[id];
      return radar === undefined ? unknownHousehold(id) : ok(radar);
    }
    return jsonResponse(404, { code: "HTTP_404", message: `no route for ${path}` });
  };
}

function ok(payload: unknown): Response {
  return jsonResponse(200, payload);
}

function unknownHousehold(id: string): Response {
  return jsonResponse(404, {
    code: "UNKNOWN_HOUSEHOLD",
    message: `no household with id '${id}'`,
  });
}

function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}
