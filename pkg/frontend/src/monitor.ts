import { ApiClient } from './api.js';
import { clear, el } from './dom.js';
import type { JobView } from './types.js';

const PHASE_ORDER = [
  'Pending',
  'Translating',
  'Annotating',
  'AwaitingHumanAnnotation',
  'Proofreading',
  'Complete',
  'Failed',
];

export interface MonitorOptions {
  pollMs?: number;
  maxBackoffMs?: number;
  onAwaitingHuman?: (view: JobView) => void;
  onComplete?: (view: JobView) => void;
  onFailed?: (view: JobView) => void;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/**
 * Live job view: polls the server, renders phase progress, paragraphs
 * side by side, divergence badges, and the running cost. Transient fetch
 * failures back off exponentially (1s up to 10s) behind a visible
 * stale-data indicator. The rendered state never moves backwards even if
 * responses arrive out of order.
 */
export class JobMonitor {
  private doc: Document;
  private highestStateIndex = 0;
  private lastView: JobView | null = null;
  private humanRoundsSeen = new Set<number>();
  private stopped = false;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private jobId: string,
    private options: MonitorOptions = {},
  ) {
    this.doc = root.ownerDocument;
  }

  stop(): void {
    this.stopped = true;
  }

  /** Polls until the job completes or fails; resolves with the final view. */
  async start(): Promise<JobView> {
    const pollMs = this.options.pollMs ?? 1000;
    const maxBackoffMs = this.options.maxBackoffMs ?? 10000;
    const sleep = this.options.sleep ?? defaultSleep;
    let backoff = pollMs;
    while (!this.stopped) {
      let view: JobView;
      try {
        view = await this.api.getJob(this.jobId);
        backoff = pollMs;
        this.setStale(false);
      } catch {
        this.setStale(true);
        await sleep(backoff);
        backoff = Math.min(backoff * 2, maxBackoffMs);
        continue;
      }
      this.ingest(view);
      const state = this.displayState();
      if (state === 'Complete') {
        this.options.onComplete?.(view);
        return view;
      }
      if (state === 'Failed') {
        this.options.onFailed?.(view);
        return view;
      }
      if (state === 'AwaitingHumanAnnotation') {
        const round = view.paragraphs[0]?.rounds.length ?? 0;
        if (!this.humanRoundsSeen.has(round)) {
          this.humanRoundsSeen.add(round);
          this.options.onAwaitingHuman?.(view);
        }
      }
      await sleep(pollMs);
    }
    if (this.lastView === null) throw new Error('monitor stopped before any view arrived');
    return this.lastView;
  }

  private ingest(view: JobView): void {
    const index = PHASE_ORDER.indexOf(view.state);
    if (index > this.highestStateIndex) this.highestStateIndex = index;
    this.lastView = view;
    this.render(view);
  }

  displayState(): string {
    return PHASE_ORDER[this.highestStateIndex];
  }

  private setStale(stale: boolean): void {
    this.root.querySelector('[data-stale]')?.remove();
    if (stale) {
      this.root.prepend(
        el(this.doc, 'div', { 'data-stale': 'true', class: 'stale-banner' }, [
          'Connection lost; showing last known state…',
        ]),
      );
    }
  }

  private render(view: JobView): void {
    clear(this.root);
    const doc = this.doc;
    const state = this.displayState();

    const phases = el(doc, 'ol', { class: 'phase-progress' });
    for (const phase of PHASE_ORDER.slice(0, PHASE_ORDER.length - 1)) {
      const reached = PHASE_ORDER.indexOf(phase) <= this.highestStateIndex;
      phases.append(
        el(doc, 'li', { class: reached ? 'phase done' : 'phase', 'data-phase': phase }, [phase]),
      );
    }

    const table = el(doc, 'table', { class: 'paragraphs' });
    table.append(
      el(doc, 'tr', {}, [
        el(doc, 'th', {}, ['#']),
        el(doc, 'th', {}, ['Source']),
        el(doc, 'th', {}, ['Draft / revision']),
      ]),
    );
    for (const paragraph of view.paragraphs) {
      const latest =
        [...paragraph.rounds].reverse().find((r) => r.revision !== null)?.revision ??
        paragraph.draft ??
        '';
      table.append(
        el(doc, 'tr', { 'data-paragraph': String(paragraph.index) }, [
          el(doc, 'td', {}, [String(paragraph.index)]),
          el(doc, 'td', { class: 'source-cell' }, [paragraph.source]),
          el(doc, 'td', { class: 'target-cell' }, [paragraph.final ?? latest]),
        ]),
      );
    }

    const warnings = el(doc, 'div', { class: 'warnings' });
    for (const warning of view.warnings) {
      const label =
        warning.kind === 'divergence'
          ? `divergence: round ${warning.round}, ratio ${warning.details.ratio}`
          : `${warning.kind}: ${warning.message}`;
      warnings.append(
        el(doc, 'span', { class: `badge ${warning.kind}`, 'data-warning': warning.kind }, [label]),
      );
    }

    this.root.append(
      el(doc, 'div', { class: 'job-state', 'data-state': state }, [`State: ${state}`]),
      phases,
      el(doc, 'div', { class: 'running-cost', 'data-cost': view.cost.total }, [
        `Cost so far: $${view.cost.total}`,
      ]),
      warnings,
      table,
    );
    if (view.failure) {
      this.root.append(el(doc, 'div', { class: 'failure' }, [view.failure]));
    }
  }
}
