// Typed client for the ricb query service. Every function takes an
// injectable fetch so tests can fake the transport.

export interface QueryHit {
  id: string;
  label: string;
  distance: number;
  thumbnail_url: string;
}

export interface QueryLatency {
  orientation: number;
  extraction: number;
  scan: number;
}

export interface QueryResponse {
  predicted_angle_deg: number;
  hits: QueryHit[];
  latency_ms: QueryLatency;
}

export interface BankInfo {
  records: number;
  dim: number;
  labels: number;
  descriptor_id: string;
  oad_estimator: string;
}

export interface QueryOptions {
  k: number;
  metric: string;
  useOad: boolean;
}

export const METRICS = ["euclidean", "manhattan", "cosine"] as const;

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Error body the service returns: {"error": code, "detail": text}. */
export class ServiceError extends Error {
  constructor(readonly code: string, detail: string) {
    super(detail);
    this.name = "ServiceError";
  }
}

async function unwrap(res: Response): Promise<unknown> {
  if (res.ok) {
    return res.json();
  }
  let code = `http_${res.status}`;
  let detail = res.statusText || `request failed with status ${res.status}`;
  try {
    const body = (await res.json()) as { error?: string; detail?: string };
    if (body.error) code = body.error;
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status-derived message
  }
  throw new ServiceError(code, detail);
}

export async function fetchHealth(base: string, f: FetchLike = fetch): Promise<void> {
  await unwrap(await f(`${base}/health`));
}

export async function fetchBankInfo(base: string, f: FetchLike = fetch): Promise<BankInfo> {
  return (await unwrap(await f(`${base}/bank/info`))) as BankInfo;
}

export async function postQuery(
  base: string,
  image: Blob,
  opts: QueryOptions,
  f: FetchLike = fetch,
  signal?: AbortSignal,
): Promise<QueryResponse> {
  const params = new URLSearchParams({
    k: String(opts.k),
    metric: opts.metric,
    use_oad: String(opts.useOad),
  });
  const form = new FormData();
  form.append("image", image, image instanceof File ? image.name : "query.png");
  const res = await f(`${base}/query?${params}`, { method: "POST", body: form, signal });
  return (await unwrap(res)) as QueryResponse;
}
