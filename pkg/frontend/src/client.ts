/**
 * Typed client for the uisearch HTTP contract. Responses are validated with
 * zod before reaching the UI; server-side errors surface verbatim through
 * ApiError so banners can show exactly what the service said. At most one
 * query is in flight: submitting a new one aborts the previous request.
 */
import {
  HealthSchema,
  LayoutSchema,
  PaletteSchema,
  QueryResponseSchema,
  type LayoutJson,
  type Palette,
  type QueryRequest,
  type QueryResponse,
} from "./schema.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const doc = (await response.json()) as { error?: string };
    return doc.error ?? `HTTP ${response.status}`;
  } catch {
    return `HTTP ${response.status}`;
  }
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  async health() {
    const r = await this.fetchImpl(`${this.baseUrl}/health`);
    if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
    return HealthSchema.parse(await r.json());
  }

  async palette(): Promise<Palette> {
    const r = await this.fetchImpl(`${this.baseUrl}/palette`);
    if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
    return PaletteSchema.parse(await r.json());
  }

  async layout(id: string): Promise<LayoutJson> {
    const r = await this.fetchImpl(`${this.baseUrl}/layouts/${encodeURIComponent(id)}`);
    if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
    return LayoutSchema.parse(await r.json());
  }

  /** POST the query body; cancels any query still in flight. */
  async query(body: QueryRequest, k: number): Promise<QueryResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const r = await this.fetchImpl(`${this.baseUrl}/query?k=${k}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
      if (!r.ok) throw new ApiError(r.status, await errorMessage(r));
      return QueryResponseSchema.parse(await r.json());
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }
}
