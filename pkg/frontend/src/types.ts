/** Payload shapes mirroring the HTTP service. Component indices are 1-based. */

export interface SessionInfo {
  session_id: string;
  revision: number;
  n_curves: number;
  p: number;
  order: number;
  domain: [number, number];
  labels: string[];
  has_tuning: boolean;
  has_model: boolean;
  selection: number[];
}

export interface TuneResponse {
  revision: number;
  j0: number;
  q_star: number;
  lambda_star: number;
  log_bcv_star: number | null;
  lambda_grid: number[];
  bcv: { rows: number; cols: number; data: number[] };
  flags: string[];
  surface_csv: string;
}

export interface DecomposeResponse {
  revision: number;
  lambda: number;
  q: number;
  eigenvalues: number[];
  rho: number[];
  var_pct: number;
}

export interface ComponentCard {
  index: number;
  rho: number;
  gaussian_distance: number;
  channel_scores: number[];
  times: number[];
  psi: number[];
  selected: boolean;
}

export interface ComponentsResponse {
  revision: number;
  q: number;
  gaussian_reference: number;
  labels: string[];
  components: ComponentCard[];
}

export interface CleanedCurve {
  channel: number;
  label: string;
  values: number[];
}

export interface CleanedResponse {
  revision: number;
  times: number[];
  curves: CleanedCurve[];
}

export interface SummaryResponse {
  revision: number;
  j0: number | null;
  q: number | null;
  lambda: number | null;
  log_bcv: number | null;
  var_pct_lambda: number | null;
  var_pct_lambda0: number | null;
  selection: number[];
  rho: number[];
  flags: string[];
}

/** Electrode layout row from the optional positions CSV. */
export interface ElectrodePosition {
  name: string;
  x: number;
  y: number;
}
