/** Payload shapes of the run service (mirrored, never recomputed). */

export interface RunSummary {
  steps: number;
  start_storage: number;
  end_storage: number;
  objective_sums: number[];
  total_cost: number;
  total_overspill: number;
  total_power: number;
  solver?: string;
  formulation?: string;
  weights?: number[];
  [key: string]: unknown;
}

export interface RunRecord {
  run_id: string;
  solver: string;
  name: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  created: string;
  started: string;
  finished: string;
  error: string;
  config: Record<string, unknown>;
  outdir: string;
  result_paths: Record<string, string>;
  summary: RunSummary | null;
  children: string[];
}

export interface OutcomeSeries {
  t: number[];
  s_start: number[];
  s_end: number[];
  r_total: number[];
  user_releases: number[][];
  evap: number[];
  overspill: number[];
  deviations: number[][];
  power: number[];
  reward: number[];
  meta: Record<string, unknown>;
}

export interface ParetoEntry {
  run_id: string;
  objective_sums: number[];
  total_cost: number | null;
  dominated: boolean;
}

export interface DatasetInfo {
  name: string;
  bytes: number;
}

export const OBJECTIVE_LABELS = [
  'D1 min level (m)',
  'D2 max level (m)',
  'D3 towns A',
  'D4 irrigation A',
  'D5 towns B',
  'D6 irrigation B',
  'D7 ecology',
  'D8 hydropower (kWh)',
];
