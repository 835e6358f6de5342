/**
 * Payload contracts for the explanation service (schema_version 1).
 * These mirror the JSON emitted by the backend; the UI consumes them
 * verbatim and performs no numerical work of its own.
 */

export const SCHEMA_VERSION = 1;

export type CellValue = number | string;

export interface TermPayload {
  kind: 'linear' | 'quadratic' | 'interaction' | 'indicator';
  features: string[];
  level: string | null;
  label: string;
  coefficient: number;
}

export interface RegressionPayload {
  family: 'multiple' | 'logistic';
  method: string;
  centered: boolean;
  intercept: number;
  terms: TermPayload[];
  center: CellValue[];
  center_response: number;
  equation: string;
  fit_stats: Record<string, number | string | null> | null;
}

export interface ActualPerturbationPayload {
  feature: string;
  target_class: number;
  original_value: number;
  boundary_value: number;
  delta: number;
  delta_std: number;
  feasible: boolean;
}

export interface EstimatedPerturbationPayload {
  feature: string;
  target_class: number;
  status: 'ok' | 'no_real_root' | 'no_term_for_feature';
  estimated_boundary_value_std: number | null;
  estimated_boundary_value: number | null;
  estimated_delta_std: number | null;
  root_multiplicity: number;
  roots: number[];
}

export interface FidelityRecordPayload {
  feature: string;
  target_class: number;
  actual_delta: number;
  estimated_delta: number | null;
  error: number | null;
  feasible: boolean;
  within_threshold: boolean;
  status: string;
}

export interface LevelFlipPayload {
  feature: string;
  target_class: number;
  original_level: string;
  flipped_level: string;
}

export interface ExplanationPayload {
  schema_version: number;
  observation_index: number | string | null;
  observation: CellValue[];
  predicted_class: number;
  target_class: number;
  response_at_x: number;
  actual_perturbations: ActualPerturbationPayload[];
  level_flips: LevelFlipPayload[];
  estimated_perturbations: EstimatedPerturbationPayload[];
  fidelity_records: FidelityRecordPayload[];
  fidelity: number | null;
  surrogate_gap: number;
  regression: RegressionPayload;
  seed: number;
}

export interface ExplainResponse {
  schema_version: number;
  observation_index: number | null;
  config: Record<string, unknown>;
  seed: number;
  fidelity_overall: number | null;
  explanations: ExplanationPayload[];
}

export interface SimplifyBlock {
  target_class: number;
  regression: RegressionPayload;
  fidelity_records: FidelityRecordPayload[];
  fidelity: number | null;
}

export interface SimplifyResponse {
  schema_version: number;
  observation_index: number;
  keep: string[];
  simplified: SimplifyBlock[];
}

export interface NeighbourhoodResponse {
  schema_version: number;
  observation_index: number;
  target_class: number;
  feature_names: string[];
  x: number[];
  points: number[][];
  responses: number[];
  bands: number[];
  weights: number[];
  is_counterfactual: boolean[];
  balanced: boolean;
  b1: number;
  b2: number;
}

export interface FeatureInfo {
  name: string;
  kind: 'numeric' | 'categorical';
  levels: string[];
  train_min: number | null;
  train_max: number | null;
  mean: number | null;
  stddev: number | null;
}

export interface SessionResponse {
  schema_version: number;
  session_id: string;
  n_train: number;
  n_test: number;
  class_names: string[];
  features: FeatureInfo[];
  training_accuracy: number | null;
}

/** The regression-side knobs the explorer exposes. */
export interface ExplorerConfig {
  method: 'bcx' | 'lime';
  family: 'multiple' | 'logistic';
  balanced: boolean;
  centering: boolean;
  use_quadratic: boolean;
  use_interaction: boolean;
  use_counterfactual_augmentation: boolean;
  max_terms: number;
  T: number;
}

export const DEFAULT_CONFIG: ExplorerConfig = {
  method: 'bcx',
  family: 'logistic',
  balanced: true,
  centering: true,
  use_quadratic: true,
  use_interaction: true,
  use_counterfactual_augmentation: false,
  max_terms: 14,
  T: 0.25,
};
