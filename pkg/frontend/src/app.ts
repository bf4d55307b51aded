/** DOM wiring: weight-draft form, run list with live polling, compare view.
 * The server is the single source of truth; this file only moves its
 * numbers onto the page. */

import { ApiClient, ApiError } from './api.js';
import { AXIS_OPTIONS, PRESET_X, PRESET_Y, deficitBars, paretoScatter, trajectoryChart } from './charts.js';
import { pollRun } from './poller.js';
import type { RunRecord } from './types.js';
import { cloneDraft, draftToRunConfig, emptyDraft, validateDraft, WeightDraft } from './weights.js';

const WEIGHT_LABELS = ['w1 min level', 'w2 max level', 'w3 towns A', 'w4 irrig A',
  'w5 towns B', 'w6 irrig B', 'w7 ecology', 'w8 hydro'];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export class Dashboard {
  client: ApiClient;
  draft: WeightDraft = emptyDraft();
  pollIntervalMs: number;
  private root: HTMLElement;
  private selected = new Set<string>();

  constructor(root: HTMLElement, client: ApiClient, pollIntervalMs = 750) {
    this.root = root;
    this.client = client;
    this.pollIntervalMs = pollIntervalMs;
  }

  async start(): Promise<void> {
    this.renderForm();
    await this.refreshDatasets();
    await this.refreshRuns();
  }

  // -- draft form ------------------------------------------------------

  private renderForm(): void {
    const form = this.root.querySelector('#draft-form')!;
    form.innerHTML = '';
    const grid = el('div', { class: 'weights-grid' });
    this.draft.weights.forEach((w, i) => {
      const wrap = el('label', { class: 'field' }, WEIGHT_LABELS[i]);
      const input = el('input', {
        type: 'number', step: 'any', min: '0', value: String(w),
        id: `w${i + 1}`, 'data-error': '',
      });
      input.addEventListener('input', () => {
        this.draft.weights[i] = Number(input.value);
        this.showErrors(validateDraft(this.draft), true);
      });
      wrap.appendChild(input);
      wrap.appendChild(el('span', { class: 'error', id: `err-w${i + 1}` }));
      grid.appendChild(wrap);
    });
    form.appendChild(grid);

    const row = el('div', { class: 'row' });
    const solver = el('select', { id: 'solver' });
    for (const s of ['ndp', 'awd-dp', 'nsdp', 'nrl']) {
      solver.appendChild(el('option', { value: s }, s));
    }
    solver.addEventListener('change', () => {
      this.draft.solver = solver.value as WeightDraft['solver'];
    });
    const formulation = el('select', { id: 'formulation' });
    for (const f of ['linear', 'quadratic']) {
      formulation.appendChild(el('option', { value: f }, f));
    }
    formulation.addEventListener('change', () => {
      this.draft.formulation = formulation.value as WeightDraft['formulation'];
    });
    const name = el('input', { id: 'draft-name', placeholder: 'run name' });
    name.addEventListener('input', () => { this.draft.name = name.value; });
    const trainYears = el('input', {
      id: 'train-years', type: 'number', min: '1', placeholder: 'train years',
    });
    trainYears.addEventListener('input', () => {
      this.draft.trainYears = trainYears.value ? Number(trainYears.value) : null;
    });
    const launch = el('button', { id: 'launch' }, 'launch run');
    launch.addEventListener('click', () => void this.launch());
    row.append(name, solver, formulation, trainYears, launch,
      el('span', { class: 'error', id: 'err-global' }));
    form.appendChild(row);
    form.appendChild(el('div', { class: 'row' })).appendChild(
      el('span', { id: 'dataset-note', class: 'muted' }));
  }

  private showErrors(errors: Map<string, string>, quiet = false): void {
    for (let i = 1; i <= 8; i += 1) {
      const span = this.root.querySelector(`#err-w${i}`);
      if (span) span.textContent = errors.get(`w${i}`) ?? '';
    }
    const global = this.root.querySelector('#err-global');
    if (global && !quiet) {
      const rest = [...errors.entries()]
        .filter(([k]) => !/^w\d$/.test(k))
        .map(([k, v]) => `${k}: ${v}`);
      global.textContent = rest.join('; ');
    }
  }

  async launch(): Promise<string | null> {
    const errors = validateDraft(this.draft);
    if (errors.size) {
      this.showErrors(errors);
      return null;
    }
    this.showErrors(new Map());
    try {
      const { run_id } = await this.client.submitRun(draftToRunConfig(this.draft));
      await this.refreshRuns();
      this.watch(run_id);
      return run_id;
    } catch (err) {
      const global = this.root.querySelector('#err-global')!;
      global.textContent = err instanceof ApiError
        ? `${err.message} ${err.fields.join('; ')}`
        : String(err);
      return null;
    }
  }

  private watch(runId: string): void {
    pollRun(this.client, runId, this.pollIntervalMs, () => {
      void this.refreshRuns();
    }).promise.catch(() => undefined);
  }

  // -- datasets and runs -------------------------------------------------

  private async refreshDatasets(): Promise<void> {
    const note = this.root.querySelector('#dataset-note');
    if (!note) return;
    try {
      const files = await this.client.datasets();
      note.textContent = files.length
        ? `data files: ${files.map((f) => f.name).join(', ')}`
        : 'no data files on the server';
    } catch (err) {
      note.textContent = `datasets unavailable: ${String(err)}`;
    }
  }

  async refreshRuns(): Promise<RunRecord[]> {
    const runs = await this.client.listRuns();
    const tbody = this.root.querySelector('#run-rows');
    if (tbody) {
      tbody.innerHTML = '';
      for (const run of runs) {
        const tr = el('tr', { 'data-run': run.run_id, class: `status-${run.status}` });
        tr.appendChild(el('td', {}, run.run_id));
        tr.appendChild(el('td', {}, run.name || '-'));
        tr.appendChild(el('td', {}, run.solver));
        tr.appendChild(el('td', { class: 'status' }, run.status));
        tr.appendChild(el('td', {},
          run.summary ? String(run.summary.total_cost) : (run.error || '')));
        const actions = el('td');
        const compare = el('input', { type: 'checkbox' }) as HTMLInputElement;
        compare.checked = this.selected.has(run.run_id);
        compare.disabled = run.status !== 'done';
        compare.addEventListener('change', () => {
          if (compare.checked) this.selected.add(run.run_id);
          else this.selected.delete(run.run_id);
          void this.renderCompare();
        });
        actions.appendChild(compare);
        const clone = el('button', { class: 'clone' }, 'clone & edit');
        clone.addEventListener('click', () => this.loadClone(run));
        actions.appendChild(clone);
        tr.appendChild(actions);
        tbody.appendChild(tr);
      }
    }
    return runs;
  }

  private loadClone(run: RunRecord): void {
    const cfg = run.config as Record<string, unknown>;
    this.draft = cloneDraft({
      ...emptyDraft(),
      name: (cfg['name'] as string) ?? '',
      solver: (cfg['solver'] as WeightDraft['solver']) ?? 'ndp',
      formulation: (cfg['formulation'] as WeightDraft['formulation']) ?? 'linear',
      weights: (cfg['weights'] as number[]) ?? emptyDraft().weights,
      trainYears: (cfg['train_years'] as number | undefined) ?? null,
    });
    this.renderForm();
  }

  // -- compare view ------------------------------------------------------

  async renderCompare(): Promise<void> {
    const target = this.root.querySelector('#compare');
    if (!target) return;
    target.innerHTML = '';
    const runs = await this.client.listRuns();
    const chosen = runs.filter((r) => this.selected.has(r.run_id));
    const ready = chosen.filter((r) => r.status === 'done');
    const skipped = chosen.filter((r) => r.status !== 'done');
    if (skipped.length) {
      target.appendChild(el('p', { class: 'muted' },
        `excluded (not done): ${skipped.map((r) => r.run_id).join(', ')}`));
    }
    if (!ready.length) {
      target.appendChild(el('p', { class: 'muted' }, 'select finished runs to compare'));
      return;
    }
    const series = await Promise.all(ready.map((r) => this.client.series(r.run_id)));
    const trajectory = trajectoryChart(ready.map((r, i) => ({
      runId: r.run_id,
      label: r.name || r.run_id,
      series: series[i],
    })));
    const bars = deficitBars(ready.map((r) => ({
      runId: r.run_id,
      label: r.name || r.run_id,
      objectiveSums: r.summary!.objective_sums,
    })));
    const pareto = await this.client.pareto(ready.map((r) => r.run_id));

    const xSel = el('select', { id: 'axis-x' });
    const ySel = el('select', { id: 'axis-y' });
    AXIS_OPTIONS.forEach((axis, i) => {
      xSel.appendChild(el('option', { value: String(i) }, axis.label));
      ySel.appendChild(el('option', { value: String(i) }, axis.label));
    });
    xSel.value = String(AXIS_OPTIONS.indexOf(PRESET_X));
    ySel.value = String(AXIS_OPTIONS.indexOf(PRESET_Y));
    const scatterBox = el('div', { id: 'scatter-box' });
    const drawScatter = () => {
      scatterBox.innerHTML = paretoScatter(
        pareto, AXIS_OPTIONS[Number(xSel.value)], AXIS_OPTIONS[Number(ySel.value)],
      ).svg;
    };
    xSel.addEventListener('change', drawScatter);
    ySel.addEventListener('change', drawScatter);

    target.appendChild(el('h3', {}, 'reservoir trajectory'));
    target.appendChild(el('div', { id: 'trajectory-box' })).innerHTML = trajectory.svg;
    target.appendChild(el('h3', {}, 'objective deviation sums'));
    target.appendChild(el('div', { id: 'bars-box' })).innerHTML = bars.svg;
    target.appendChild(el('h3', {}, 'trade-off scatter (dominated points greyed)'));
    const axisRow = el('div', { class: 'row' });
    axisRow.append('x: ', xSel, ' y: ', ySel);
    target.appendChild(axisRow);
    target.appendChild(scatterBox);
    drawScatter();
  }
}

export function boot(): void {
  const root = document.getElementById('dashboard');
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const base = params.get('api') ?? 'http://127.0.0.1:8080';
  const interval = Number(params.get('poll') ?? '750');
  const dashboard = new Dashboard(root, new ApiClient(base), interval);
  void dashboard.start();
  (window as unknown as { dashboard: Dashboard }).dashboard = dashboard;
}

if (typeof document !== 'undefined' && document.getElementById('dashboard')) {
  boot();
}
