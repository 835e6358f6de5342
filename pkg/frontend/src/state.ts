/**
 * Explorer view state: the selected observation, the working config, the
 * last server response, and the comparison history of tried configs.
 *
 * Requests never overlap: one is in flight at a time, and config changes
 * arriving meanwhile coalesce into a single trailing request carrying the
 * latest config. On a server error the previous payload stays on screen
 * and only the banner changes.
 */

import type { ApiClient } from './api.js';
import type { ExplainResponse, ExplorerConfig } from './types.js';
import { DEFAULT_CONFIG } from './types.js';

export interface SerializedView {
  observation_index: number;
  seed: number;
  config: ExplorerConfig;
}

export class ExplorerState {
  observationIndex = 0;
  seed = 0;
  config: ExplorerConfig = { ...DEFAULT_CONFIG };
  last: ExplainResponse | null = null;
  history: { label: string; fidelity: number | null }[] = [];
  errorBanner: string | null = null;
  pending = false;

  private queued: ExplorerConfig | null = null;
  private listeners: (() => void)[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
  ) {}

  onUpdate(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) {
      fn();
    }
  }

  async selectObservation(index: number): Promise<void> {
    this.observationIndex = index;
    this.history = [];
    await this.applyConfigChange({});
  }

  /** Apply a single config change. Issues exactly one request when idle;
   * changes arriving while a request is pending accumulate and coalesce
   * into one trailing request carrying the latest config. */
  async applyConfigChange(patch: Partial<ExplorerConfig>): Promise<void> {
    this.config = { ...this.config, ...patch };
    if (this.pending) {
      this.queued = this.config;
      return;
    }
    await this.issue(this.config);
    while (this.queued !== null) {
      const trailing = this.queued;
      this.queued = null;
      await this.issue(trailing);
    }
  }

  private async issue(config: ExplorerConfig): Promise<void> {
    this.pending = true;
    this.notify();
    try {
      const payload = await this.api.explain(this.sessionId, {
        observation_index: this.observationIndex,
        seed: this.seed,
        overrides: { ...config },
      });
      this.last = payload;
      this.errorBanner = null;
      this.history.push({
        label: describeConfig(config),
        fidelity: payload.fidelity_overall,
      });
    } catch (err) {
      this.errorBanner = err instanceof Error ? err.message : String(err);
    } finally {
      this.pending = false;
      this.notify();
    }
  }

  serialize(): string {
    return JSON.stringify({
      observation_index: this.observationIndex,
      seed: this.seed,
      config: this.config,
    } satisfies SerializedView);
  }

  /** Replay a serialized view: same observation, seed and config issue the
   * same request, which reproduces the explanation. */
  async replay(serialized: string): Promise<void> {
    const view = JSON.parse(serialized) as SerializedView;
    this.observationIndex = view.observation_index;
    this.seed = view.seed;
    this.config = view.config;
    this.queued = null;
    await this.issue(view.config);
  }
}

export function describeConfig(config: ExplorerConfig): string {
  const flags: string[] = [config.method, config.family, `terms<=${config.max_terms}`];
  if (config.use_quadratic) flags.push('quad');
  if (config.use_interaction) flags.push('inter');
  if (config.use_counterfactual_augmentation) flags.push('aug');
  if (!config.balanced) flags.push('imbalanced');
  if (!config.centering) flags.push('uncentred');
  flags.push(`T=${config.T}`);
  return flags.join(' ');
}
