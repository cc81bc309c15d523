// UI state machine, free of DOM so it can be unit tested. One query in
// flight at a time: a newer submission aborts the old request, and a
// sequence ticket discards any stale response that lands anyway.

import { FetchLike, QueryOptions, QueryResponse, ServiceError, postQuery } from "./api.js";

export const MAX_UPLOAD_BYTES = 20 * 1024 * 1024;

export interface UiState {
  image: File | null;
  k: number;
  metric: string;
  useOad: boolean;
  response: QueryResponse | null;
  loading: boolean;
  error: string | null;
}

export type StateListener = (state: UiState) => void;

export class QueryController {
  readonly state: UiState = {
    image: null,
    k: 20,
    metric: "euclidean",
    useOad: true,
    response: null,
    loading: false,
    error: null,
  };

  private seq = 0;
  private inflight: AbortController | null = null;

  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = fetch,
    private readonly listener: StateListener = () => {},
  ) {}

  private emit(): void {
    this.listener(this.state);
  }

  /** Oversized files are rejected here, before any network traffic. */
  selectImage(file: File): Promise<void> {
    if (file.size > MAX_UPLOAD_BYTES) {
      this.state.error = `image is ${file.size} bytes; limit is ${MAX_UPLOAD_BYTES}`;
      this.emit();
      return Promise.resolve();
    }
    this.state.image = file;
    this.state.error = null;
    return this.submit();
  }

  setK(k: number): Promise<void> {
    this.state.k = Math.max(1, Math.floor(k));
    return this.resubmit();
  }

  setMetric(metric: string): Promise<void> {
    this.state.metric = metric;
    return this.resubmit();
  }

  setUseOad(useOad: boolean): Promise<void> {
    this.state.useOad = useOad;
    return this.resubmit();
  }

  /** Re-query with the same image; no-op until one is selected. */
  private resubmit(): Promise<void> {
    if (!this.state.image) {
      this.emit();
      return Promise.resolve();
    }
    return this.submit();
  }

  async submit(): Promise<void> {
    const image = this.state.image;
    if (!image) return;
    this.inflight?.abort();
    this.inflight = new AbortController();
    const ticket = ++this.seq;
    this.state.loading = true;
    this.state.error = null;
    this.emit();
    const opts: QueryOptions = {
      k: this.state.k,
      metric: this.state.metric,
      useOad: this.state.useOad,
    };
    try {
      const response = await postQuery(this.base, image, opts, this.fetchFn,
                                       this.inflight.signal);
      if (ticket !== this.seq) return; // superseded while awaiting
      this.state.response = response;
      this.state.loading = false;
    } catch (err) {
      if (ticket !== this.seq) return;
      if (err instanceof DOMException && err.name === "AbortError") return;
      this.state.loading = false;
      this.state.error = err instanceof ServiceError
        ? `${err.code}: ${err.message}`
        : "service unreachable - is `ricb serve` running?";
    }
    this.emit();
  }
}
