/** Thin typed client for the run service; the server is the only source of
 * truth and every number rendered comes from these responses verbatim. */

import type { DatasetInfo, OutcomeSeries, ParetoEntry, RunRecord } from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  fields: string[];

  constructor(status: number, message: string, fields: string[] = []) {
    super(message);
    this.status = status;
    this.fields = fields;
  }
}

export class ApiClient {
  baseUrl: string;
  token?: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, token?: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    this.token = token;
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private headers(json = false): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h['Content-Type'] = 'application/json';
    if (this.token) h['Authorization'] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const text = await resp.text();
    if (!resp.ok) {
      let message = `${resp.status}`;
      let fields: string[] = [];
      try {
        const body = JSON.parse(text);
        message = body.error ?? message;
        fields = body.fields ?? [];
      } catch {
        message = text || message;
      }
      throw new ApiError(resp.status, message, fields);
    }
    return JSON.parse(text) as T;
  }

  async listRuns(): Promise<RunRecord[]> {
    const body = await this.request<{ runs: RunRecord[] }>('/runs', {
      headers: this.headers(),
    });
    return body.runs;
  }

  getRun(id: string): Promise<RunRecord> {
    return this.request<RunRecord>(`/runs/${id}`, { headers: this.headers() });
  }

  submitRun(config: Record<string, unknown>): Promise<{ run_id: string }> {
    return this.request<{ run_id: string }>('/runs', {
      method: 'POST',
      headers: this.headers(true),
      body: JSON.stringify(config),
    });
  }

  cancelRun(id: string): Promise<RunRecord> {
    return this.request<RunRecord>(`/runs/${id}/cancel`, {
      method: 'POST',
      headers: this.headers(true),
      body: '{}',
    });
  }

  series(id: string): Promise<OutcomeSeries> {
    return this.request<OutcomeSeries>(`/runs/${id}/series`, {
      headers: this.headers(),
    });
  }

  async pareto(ids: string[]): Promise<ParetoEntry[]> {
    const body = await this.request<{ entries: ParetoEntry[] }>(
      `/pareto?ids=${ids.join(',')}`,
      { headers: this.headers() },
    );
    return body.entries;
  }

  async datasets(): Promise<DatasetInfo[]> {
    const body = await this.request<{ datasets: DatasetInfo[] }>('/datasets', {
      headers: this.headers(),
    });
    return body.datasets;
  }
}
