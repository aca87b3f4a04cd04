import { ApiClient } from './api.js';
import { AnnotationEditor } from './editor.js';
import { clear, el } from './dom.js';
import { JobMonitor } from './monitor.js';
import type { CodeEntry, JobView } from './types.js';
import { SetupWizard } from './wizard.js';

export interface StudioOptions {
  baseUrl?: string;
  pollMs?: number;
  fetchFn?: (input: string, init?: RequestInit) => Promise<Response>;
}

/**
 * The studio shell: wizard -> monitor -> (annotation editor per round) ->
 * result download. One DOM region per stage; the monitor keeps polling the
 * whole time so a resumed job flows straight back into progress view.
 */
export class Studio {
  readonly api: ApiClient;
  private doc: Document;
  private wizardRoot: HTMLElement;
  private monitorRoot: HTMLElement;
  private editorRoot: HTMLElement;
  private resultRoot: HTMLElement;
  private codes: CodeEntry[] = [];
  monitor: JobMonitor | null = null;
  editor: AnnotationEditor | null = null;
  lastResultText: string | null = null;

  constructor(
    root: HTMLElement,
    private options: StudioOptions = {},
  ) {
    this.doc = root.ownerDocument;
    this.api = new ApiClient(options.baseUrl ?? '', options.fetchFn);
    this.wizardRoot = el(this.doc, 'section', { id: 'wizard' });
    this.monitorRoot = el(this.doc, 'section', { id: 'monitor' });
    this.editorRoot = el(this.doc, 'section', { id: 'editor' });
    this.resultRoot = el(this.doc, 'section', { id: 'result' });
    root.append(this.wizardRoot, this.monitorRoot, this.editorRoot, this.resultRoot);
  }

  async start(): Promise<void> {
    this.codes = await this.api.listCodes();
    const wizard = new SetupWizard(this.wizardRoot, this.api, {
      onCreated: (job) => {
        clear(this.wizardRoot);
        void this.watch(job.job_id);
      },
    });
    await wizard.start();
  }

  async watch(jobId: string): Promise<JobView> {
    this.monitor = new JobMonitor(this.monitorRoot, this.api, jobId, {
      pollMs: this.options.pollMs ?? 1000,
      onAwaitingHuman: (view) => this.openEditor(view),
      onComplete: (view) => void this.showResult(view),
    });
    return this.monitor.start();
  }

  private openEditor(view: JobView): void {
    this.editor = new AnnotationEditor(this.editorRoot, this.api, this.codes, view, {
      onResumed: () => clear(this.editorRoot),
    });
  }

  async showResult(view: JobView): Promise<void> {
    clear(this.resultRoot);
    const download = el(this.doc, 'button', { 'data-action': 'download', type: 'button' }, [
      'Download translation (.txt)',
    ]);
    download.addEventListener('click', () => void this.download(view.job_id));
    this.resultRoot.append(
      el(this.doc, 'h2', {}, ['Translation complete']),
      download,
    );
  }

  /** Fetches the txt rendering and hands it to the browser as a download. */
  async download(jobId: string): Promise<string> {
    const text = await this.api.getResultText(jobId);
    this.lastResultText = text;
    const view = this.doc.defaultView;
    if (view && typeof view.URL?.createObjectURL === 'function') {
      const url = view.URL.createObjectURL(new view.Blob([text], { type: 'text/plain' }));
      const anchor = el(this.doc, 'a', { href: url, download: `${jobId}.txt` });
      this.doc.body.append(anchor);
      anchor.click();
      anchor.remove();
      view.URL.revokeObjectURL(url);
    }
    return text;
  }
}

export function mountStudio(root: HTMLElement, options: StudioOptions = {}): Studio {
  const studio = new Studio(root, options);
  void studio.start();
  return studio;
}
