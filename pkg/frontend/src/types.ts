export interface Meta {
  fund_size: number;
  horizon_years: number;
  moic_hurdle: number;
  hurdle_irr: number;
  exit_years: number;
  n_capital_points: number;
  n_time_points: number;
}

export type Verdict = "accept" | "reject" | "unaffordable";

export interface Decision {
  verdict: Verdict;
  threshold_moic: number | null;
  threshold_irr: number | null;
  deal_value_excess: number | null;
}

export interface ThresholdResponse {
  threshold_moic: number;
  threshold_irr: number;
}

export interface SurfaceRow {
  t_years: number;
  size_fraction: number;
  required_irr: number;
}

export interface DealQuery {
  f: number;
  t: number;
  size: number;
  irr_underwritten: number;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
