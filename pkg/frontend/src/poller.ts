/** Status polling: the service has no push channel, so drafts become rows
 * that refresh until they settle. Interval configurable. */

import type { ApiClient } from './api.js';
import type { RunRecord } from './types.js';

export interface PollHandle {
  promise: Promise<RunRecord>;
  stop: () => void;
}

const SETTLED = new Set(['done', 'failed']);

export function pollRun(
  client: ApiClient,
  runId: string,
  intervalMs = 500,
  onUpdate?: (record: RunRecord) => void,
  timeoutMs = 10 * 60 * 1000,
): PollHandle {
  let stopped = false;
  let timer: ReturnType<typeof setTimeout> | undefined;
  let abort: (err: Error) => void = () => undefined;

  const promise = new Promise<RunRecord>((resolve, reject) => {
    abort = reject;
    const started = Date.now();
    const tick = async () => {
      if (stopped) return;
      let record: RunRecord;
      try {
        record = await client.getRun(runId);
      } catch (err) {
        return reject(err);
      }
      if (stopped) return;
      onUpdate?.(record);
      if (SETTLED.has(record.status)) return resolve(record);
      if (Date.now() - started > timeoutMs) {
        return reject(new Error(`run ${runId} still ${record.status} after timeout`));
      }
      timer = setTimeout(tick, intervalMs);
    };
    void tick();
  });

  return {
    promise,
    stop: () => {
      stopped = true;
      if (timer !== undefined) clearTimeout(timer);
      abort(new Error('polling stopped'));
    },
  };
}
