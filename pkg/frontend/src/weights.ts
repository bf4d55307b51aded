/** Weight-vector drafts: what the user iterates on between runs. */

export interface WeightDraft {
  name: string;
  solver: 'ndp' | 'awd-dp' | 'nsdp' | 'nrl';
  formulation: 'linear' | 'quadratic';
  weights: number[];
  series: string;
  demands: string;
  system: string;
  gridStep: number;
  trainYears: number | null;
  maxEpisodes: number;
  nClasses: number;
  seed: number;
}

export function emptyDraft(): WeightDraft {
  return {
    name: '',
    solver: 'ndp',
    formulation: 'linear',
    weights: [2_000_000, 2_000_000, 200, 1, 200, 1, 300, 1e-8],
    series: 'series.csv',
    demands: 'demands.csv',
    system: 'system.json',
    gridStep: 1500,
    trainYears: null,
    maxEpisodes: 10_000,
    nClasses: 5,
    seed: 0,
  };
}

export function cloneDraft(draft: WeightDraft): WeightDraft {
  return {
    ...draft,
    weights: [...draft.weights],
    name: draft.name ? `${draft.name} (copy)` : '(copy)',
  };
}

/** Client-side mirror of the server's weight invariants: reject before
 * submitting what the service would reject anyway. */
export function validateDraft(draft: WeightDraft): Map<string, string> {
  const errors = new Map<string, string>();
  if (draft.weights.length !== 8) {
    errors.set('weights', 'exactly 8 weights required');
  } else {
    draft.weights.forEach((w, i) => {
      if (!Number.isFinite(w)) errors.set(`w${i + 1}`, 'not a number');
      else if (w < 0) errors.set(`w${i + 1}`, 'must be nonnegative');
    });
    if (!draft.weights.some((w) => w > 0)) {
      errors.set('weights', 'at least one weight must be positive');
    }
  }
  if (!(draft.gridStep > 0)) errors.set('gridStep', 'must be positive');
  if (!draft.series) errors.set('series', 'choose a series file');
  if (!draft.demands) errors.set('demands', 'choose a demands file');
  if (!draft.system) errors.set('system', 'choose a system file');
  const needsTraining = draft.solver === 'nsdp' || draft.solver === 'nrl';
  if (needsTraining && (draft.trainYears === null || draft.trainYears < 1)) {
    errors.set('trainYears', `${draft.solver} needs training years`);
  }
  return errors;
}

/** The run-config payload POST /runs expects. */
export function draftToRunConfig(draft: WeightDraft): Record<string, unknown> {
  const params: Record<string, unknown> = {};
  if (draft.solver === 'nsdp' || draft.solver === 'nrl') {
    params['n_classes'] = draft.nClasses;
  }
  if (draft.solver === 'nrl') {
    params['max_episodes'] = draft.maxEpisodes;
    params['checkpoint_every'] = 0;
  }
  const config: Record<string, unknown> = {
    solver: draft.solver,
    formulation: draft.formulation,
    series: draft.series,
    demands: draft.demands,
    system: draft.system,
    weights: [...draft.weights],
    grid_step: draft.gridStep,
    name: draft.name,
    seed: draft.seed,
    params,
  };
  if (draft.trainYears !== null) config['train_years'] = draft.trainYears;
  return config;
}
