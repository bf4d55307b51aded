import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

interface Call {
  url: string;
  init?: RequestInit;
}

function fakeFetch(responses: Record<string, { status: number; body: unknown }>) {
  const calls: Call[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const key = Object.keys(responses).find((k) => url.includes(k));
    const spec = key ? responses[key] : { status: 404, body: { error: 'nope' } };
    return new Response(JSON.stringify(spec.body), { status: spec.status });
  };
  return { impl, calls };
}

describe('api client', () => {
  it('builds urls against the base and parses payloads', async () => {
    const { impl, calls } = fakeFetch({
      '/runs': { status: 200, body: { runs: [{ run_id: 'run-1' }] } },
    });
    const client = new ApiClient('http://x:1///', undefined, impl);
    const runs = await client.listRuns();
    expect(runs[0].run_id).toBe('run-1');
    expect(calls[0].url).toBe('http://x:1/runs');
  });

  it('joins pareto ids into the query', async () => {
    const { impl, calls } = fakeFetch({
      '/pareto': { status: 200, body: { entries: [] } },
    });
    const client = new ApiClient('http://x:1', undefined, impl);
    await client.pareto(['a', 'b']);
    expect(calls[0].url).toContain('/pareto?ids=a,b');
  });

  it('surfaces field errors from a 400', async () => {
    const { impl } = fakeFetch({
      '/runs': { status: 400, body: { error: 'invalid config', fields: ['weights: bad'] } },
    });
    const client = new ApiClient('http://x:1', undefined, impl);
    try {
      await client.submitRun({});
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).fields).toEqual(['weights: bad']);
      expect((err as ApiError).status).toBe(400);
    }
  });

  it('sends the shared token when configured', async () => {
    const { impl, calls } = fakeFetch({
      '/datasets': { status: 200, body: { datasets: [] } },
    });
    const client = new ApiClient('http://x:1', 'sesame', impl);
    await client.datasets();
    const headers = calls[0].init?.headers as Record<string, string>;
    expect(headers['Authorization']).toBe('Bearer sesame');
  });
});
