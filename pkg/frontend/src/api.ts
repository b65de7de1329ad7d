import type { ExtractRequest, ExtractResponse, HealthInfo, ModelInfo } from "./types";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText || `HTTP ${response.status}`;
  }
}

/** Thin typed client over the three API endpoints. */
export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (!response.ok) throw new ApiError(response.status, await detailOf(response));
    return response.json() as Promise<T>;
  }

  getModels(): Promise<ModelInfo[]> {
    return this.getJson<ModelInfo[]>("/api/models");
  }

  getHealth(): Promise<HealthInfo> {
    return this.getJson<HealthInfo>("/api/health");
  }

  async extract(request: ExtractRequest): Promise<ExtractResponse> {
    const response = await this.fetchFn(this.baseUrl + "/api/extract", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw new ApiError(response.status, await detailOf(response));
    return response.json() as Promise<ExtractResponse>;
  }
}
