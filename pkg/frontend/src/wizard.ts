import { ApiClient, ApiError } from './api.js';
import { clear, el } from './dom.js';
import {
  DEFAULT_DIRECTION,
  JobSummary,
  ROLES,
  SessionConfig,
} from './types.js';

export interface WizardCallbacks {
  onCreated: (job: JobSummary, session: SessionConfig) => void;
}

const STEPS = ['API keys', 'Agent roles', 'Direction', 'Glossary & document'] as const;

/**
 * Four-step job setup: provider keys, role/model selection, translation
 * direction, glossary choice plus the document text. Submits to POST /jobs;
 * server field errors render inline under the matching inputs and nothing
 * the user entered is lost. Keys live only in this object, never in storage.
 */
export class SetupWizard {
  private doc: Document;
  private session: SessionConfig = {
    providerKeys: new Map(),
    roles: { Translator: '', Annotator: '', Proofreader: '' },
    direction: { ...DEFAULT_DIRECTION },
    glossaryRef: null,
  };
  private step = 0;
  private providers: string[] = [];
  private fieldErrors = new Map<string, string>();
  private text = '';
  private humanAnnotation = false;
  private rounds = 1;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private callbacks: WizardCallbacks,
  ) {
    this.doc = root.ownerDocument;
  }

  async start(): Promise<void> {
    this.providers = await this.api.listProviders();
    for (const role of ROLES) this.session.roles[role] = this.providers[0] ?? '';
    this.render();
  }

  private render(): void {
    clear(this.root);
    const doc = this.doc;
    const heading = el(doc, 'h2', { class: 'wizard-step-title' }, [
      `Step ${this.step + 1} of ${STEPS.length}: ${STEPS[this.step]}`,
    ]);
    const body = el(doc, 'div', { class: 'wizard-body' });
    switch (this.step) {
      case 0:
        this.renderKeyStep(body);
        break;
      case 1:
        this.renderRoleStep(body);
        break;
      case 2:
        this.renderDirectionStep(body);
        break;
      case 3:
        this.renderFinalStep(body);
        break;
    }
    const nav = el(doc, 'div', { class: 'wizard-nav' });
    if (this.step > 0) {
      const back = el(doc, 'button', { type: 'button', 'data-action': 'back' }, ['Back']);
      back.addEventListener('click', () => {
        this.step -= 1;
        this.render();
      });
      nav.append(back);
    }
    const forward = el(
      doc,
      'button',
      { type: 'button', 'data-action': this.step === STEPS.length - 1 ? 'create' : 'next' },
      [this.step === STEPS.length - 1 ? 'Create job' : 'Next'],
    );
    forward.addEventListener('click', () => {
      if (this.step === STEPS.length - 1) void this.submit();
      else {
        this.step += 1;
        this.render();
      }
    });
    nav.append(forward);
    this.root.append(heading, body, nav);
  }

  private errorNote(field: string): HTMLElement {
    const message = this.fieldErrors.get(field) ?? '';
    return el(this.doc, 'div', { class: 'field-error', 'data-field': field }, [message]);
  }

  private renderKeyStep(body: HTMLElement): void {
    const doc = this.doc;
    body.append(
      el(doc, 'p', {}, [
        'Keys are kept in memory for this session only and sent per request.',
      ]),
    );
    for (const provider of this.providers) {
      const input = el(doc, 'input', {
        type: 'password',
        'data-key-for': provider,
        placeholder: `${provider} API key (blank if not needed)`,
        autocomplete: 'off',
      });
      input.value = this.session.providerKeys.get(provider) ?? '';
      input.addEventListener('input', () => {
        if (input.value) this.session.providerKeys.set(provider, input.value);
        else this.session.providerKeys.delete(provider);
      });
      body.append(el(doc, 'label', {}, [`${provider}: `, input]));
    }
  }

  private renderRoleStep(body: HTMLElement): void {
    const doc = this.doc;
    for (const role of ROLES) {
      const select = el(doc, 'select', { 'data-role': role });
      for (const provider of this.providers) {
        const option = el(doc, 'option', { value: provider }, [provider]);
        if (this.session.roles[role] === provider) option.selected = true;
        select.append(option);
      }
      select.addEventListener('change', () => {
        this.session.roles[role] = select.value;
      });
      body.append(el(doc, 'label', {}, [`${role}: `, select]));
    }
    body.append(this.errorNote('role_bindings'));
  }

  private renderDirectionStep(body: HTMLElement): void {
    const doc = this.doc;
    const source = el(doc, 'input', { 'data-direction': 'source' });
    source.value = this.session.direction.source;
    source.addEventListener('input', () => (this.session.direction.source = source.value));
    const target = el(doc, 'input', { 'data-direction': 'target' });
    target.value = this.session.direction.target;
    target.addEventListener('input', () => (this.session.direction.target = target.value));
    body.append(
      el(doc, 'label', {}, ['Source language: ', source]),
      el(doc, 'label', {}, ['Target language: ', target]),
      this.errorNote('direction'),
    );
  }

  private renderFinalStep(body: HTMLElement): void {
    const doc = this.doc;
    const glossary = el(doc, 'input', {
      'data-field': 'glossary_ref',
      placeholder: 'glossary name (blank = none)',
    });
    glossary.value = this.session.glossaryRef ?? '';
    glossary.addEventListener('input', () => {
      this.session.glossaryRef = glossary.value || null;
    });

    const human = el(doc, 'input', { type: 'checkbox', 'data-field': 'human_annotation' });
    human.checked = this.humanAnnotation;
    human.addEventListener('change', () => (this.humanAnnotation = human.checked));

    const rounds = el(doc, 'input', { type: 'number', 'data-field': 'rounds', min: '1' });
    rounds.value = String(this.rounds);
    rounds.addEventListener('input', () => (this.rounds = Number(rounds.value) || 1));

    const text = el(doc, 'textarea', { 'data-field': 'text', rows: '8' });
    text.value = this.text;
    text.addEventListener('input', () => (this.text = text.value));

    body.append(
      el(doc, 'label', {}, ['Glossary: ', glossary]),
      this.errorNote('glossary_ref'),
      el(doc, 'label', {}, ['Annotate myself (human-in-the-loop): ', human]),
      el(doc, 'label', {}, ['Refinement rounds: ', rounds]),
      this.errorNote('rounds'),
      el(doc, 'label', {}, ['Document text (blank line between paragraphs): ', text]),
      this.errorNote('text'),
    );
  }

  async submit(): Promise<void> {
    this.fieldErrors.clear();
    try {
      const job = await this.api.createJob(
        {
          role_bindings: { ...this.session.roles },
          direction: { ...this.session.direction },
          glossary_ref: this.session.glossaryRef,
          rounds: this.rounds,
          human_annotation: this.humanAnnotation,
          text: this.text,
        },
        this.session.providerKeys,
      );
      this.callbacks.onCreated(job, this.session);
    } catch (error) {
      if (error instanceof ApiError) {
        for (const fieldError of error.fieldErrors()) {
          this.fieldErrors.set(fieldError.field, fieldError.message);
        }
        if (this.fieldErrors.size === 0) this.fieldErrors.set('text', String(error.message));
        this.step = this.pickStepForErrors();
        this.render();
        return;
      }
      throw error;
    }
  }

  private pickStepForErrors(): number {
    if (this.fieldErrors.has('role_bindings')) return 1;
    if (this.fieldErrors.has('direction')) return 2;
    return 3;
  }
}
