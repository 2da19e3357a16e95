import {
  Algorithm,
  ErrorBody,
  ExplanationReport,
  HistogramPayload,
  HouseholdsPage,
  RadarPayload,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export interface ExplainParams {
  algorithm?: Algorithm;
  seed?: number;
}

/** What the views need from the service; ApiClient is the HTTP implementation. */
export interface ServiceClient {
  listHouseholds(offset?: number, limit?: number): Promise<HouseholdsPage>;
  explain(householdId: string, params?: ExplainParams): Promise<ExplanationReport>;
  incomeDistribution(householdId?: string): Promise<HistogramPayload>;
  radar(householdId: string): Promise<RadarPayload>;
}

/**
 * Thin client for the /v1 service API. Responses are returned as parsed
 * payloads without reshaping; non-2xx responses raise ApiError carrying the
 * service error code.
 */
export class ApiClient implements ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  listHouseholds(offset?: number, limit?: number): Promise<HouseholdsPage> {
    const query = new URLSearchParams();
    if (offset !== undefined) query.set("offset", String(offset));
    if (limit !== undefined) query.set("limit", String(limit));
    const qs = query.toString();
    return this.request(`/v1/households${qs ? `?${qs}` : ""}`);
  }

  explain(householdId: string, params: ExplainParams = {}): Promise<ExplanationReport> {
    const body: Record<string, unknown> = { household_id: householdId };
    if (params.algorithm !== undefined) body.algorithm = params.algorithm;
    if (params.seed !== undefined) body.seed = params.seed;
    return this.request("/v1/explain", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  incomeDistribution(householdId?: string): Promise<HistogramPayload> {
    const qs = householdId === undefined ? "" : `?household=${encodeURIComponent(householdId)}`;
    return this.request(`/v1/income-distribution${qs}`);
  }

  radar(householdId: string): Promise<RadarPayload> {
    return this.request(`/v1/radar/${encodeURIComponent(householdId)}`);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await readErrorBody(response));
    }
    return (await response.json()) as T;
  }
}

async function readErrorBody(response: Response): Promise<ErrorBody> {
  try {
    const body = (await response.json()) as Partial<ErrorBody>;
    if (typeof body.code === "string" && typeof body.message === "string") {
      return { code: body.code, message: body.message, detail: body.detail };
    }
  } catch {
    // fall through to the synthetic body
  }
  return { code: `HTTP_${response.status}`, message: response.statusText || "request failed" };
}
