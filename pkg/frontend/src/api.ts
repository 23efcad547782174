import type {
  ApiErrorBody,
  DealQuery,
  Decision,
  Meta,
  SurfaceRow,
  ThresholdResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as ApiErrorBody;
    code = body.error.code;
    message = body.error.message;
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(code, message, response.status);
}

export function thresholdUrl(base: string, f: number, s: number, t: number): string {
  const params = new URLSearchParams({ f: String(f), s: String(s), t: String(t) });
  return `${base}/api/threshold?${params.toString()}`;
}

export function surfaceUrl(base: string, fractions: number[], nTimes: number): string {
  const params = new URLSearchParams({
    fractions: fractions.join(","),
    n_times: String(nTimes),
  });
  return `${base}/api/surface?${params.toString()}`;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async meta(): Promise<Meta> {
    return parseOrThrow<Meta>(await fetch(`${this.base}/api/meta`));
  }

  async threshold(f: number, s: number, t: number): Promise<ThresholdResponse> {
    return parseOrThrow<ThresholdResponse>(await fetch(thresholdUrl(this.base, f, s, t)));
  }

  async decide(query: DealQuery): Promise<Decision> {
    const response = await fetch(`${this.base}/api/decide`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(query),
    });
    return parseOrThrow<Decision>(response);
  }

  async surface(fractions: number[], nTimes: number): Promise<SurfaceRow[]> {
    const body = await parseOrThrow<{ rows: SurfaceRow[] }>(
      await fetch(surfaceUrl(this.base, fractions, nTimes)),
    );
    return body.rows;
  }
}
