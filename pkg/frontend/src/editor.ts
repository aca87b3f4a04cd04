import { ApiClient, ApiError } from './api.js';
import { clear, el } from './dom.js';
import { AnnotationDraft, occurrenceAt, serializeAnnotations } from './records.js';
import type { CodeEntry, JobView } from './types.js';

export interface EditorCallbacks {
  onResumed?: () => void;
}

interface ParagraphPanel {
  index: number;
  draftText: string;
  rows: AnnotationDraft[];
  rowList: HTMLElement;
  errorBox: HTMLElement;
}

/**
 * Human annotation view for a waiting job. The reviewer selects a span in
 * the rendered draft (occurrence index is computed from the selection
 * offset), picks a code from the palette (grouped by category, descriptions
 * on hover), adds optional suggestion/rationale, and submits per paragraph.
 * "Finish round" resumes the job; its annotations drive the proofreader.
 */
export class AnnotationEditor {
  private doc: Document;
  private panels = new Map<number, ParagraphPanel>();
  private pending: Partial<AnnotationDraft> = {};
  private activeParagraph = 0;
  private spanLabel!: HTMLElement;
  private suggestionInput!: HTMLInputElement;
  private rationaleInput!: HTMLInputElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private codes: CodeEntry[],
    private view: JobView,
    private callbacks: EditorCallbacks = {},
  ) {
    this.doc = root.ownerDocument;
    this.render();
  }

  private render(): void {
    clear(this.root);
    const doc = this.doc;
    this.root.append(
      el(doc, 'h2', {}, [`Annotate round ${this.view.paragraphs[0]?.rounds.length ?? 1}`]),
    );
    this.root.append(this.renderPalette());

    this.spanLabel = el(doc, 'span', { 'data-selected-span': '' }, ['(select a span)']);
    this.suggestionInput = el(doc, 'input', { 'data-field': 'suggestion' });
    this.suggestionInput.addEventListener('input', () => {
      this.pending.suggestion = this.suggestionInput.value;
    });
    this.rationaleInput = el(doc, 'input', { 'data-field': 'rationale' });
    this.rationaleInput.addEventListener('input', () => {
      this.pending.rationale = this.rationaleInput.value;
    });
    const add = el(doc, 'button', { 'data-action': 'add-annotation', type: 'button' }, [
      'Add annotation',
    ]);
    add.addEventListener('click', () => this.addAnnotation());
    this.root.append(
      el(doc, 'div', { class: 'draft-controls' }, [
        el(doc, 'label', {}, ['Span: ', this.spanLabel]),
        el(doc, 'label', {}, ['Suggestion: ', this.suggestionInput]),
        el(doc, 'label', {}, ['Rationale: ', this.rationaleInput]),
        add,
      ]),
    );

    for (const paragraph of this.view.paragraphs) {
      const latest =
        [...paragraph.rounds].reverse().find((r) => r.revision !== null)?.revision ??
        paragraph.draft ??
        '';
      const draftBox = el(doc, 'div', {
        class: 'draft-text',
        'data-draft-for': String(paragraph.index),
      }, [latest]);
      draftBox.addEventListener('mouseup', () => this.captureSelection(paragraph.index, draftBox));
      const rowList = el(doc, 'ul', { class: 'annotation-rows' });
      const errorBox = el(doc, 'div', { class: 'paragraph-error', 'data-error-for': String(paragraph.index) });
      const submit = el(doc, 'button', { type: 'button', 'data-submit': String(paragraph.index) }, [
        'Save annotations',
      ]);
      submit.addEventListener('click', () => void this.submitParagraph(paragraph.index));
      this.root.append(
        el(doc, 'section', { class: 'paragraph-panel', 'data-panel': String(paragraph.index) }, [
          el(doc, 'h3', {}, [`Paragraph ${paragraph.index}`]),
          el(doc, 'div', { class: 'source-text' }, [paragraph.source]),
          draftBox,
          rowList,
          errorBox,
          submit,
        ]),
      );
      this.panels.set(paragraph.index, {
        index: paragraph.index,
        draftText: latest,
        rows: [],
        rowList,
        errorBox,
      });
    }

    const finish = el(doc, 'button', { type: 'button', 'data-action': 'finish-round' }, [
      'Finish round',
    ]);
    finish.addEventListener('click', () => void this.finishRound());
    this.root.append(finish);
  }

  private renderPalette(): HTMLElement {
    const doc = this.doc;
    const palette = el(doc, 'div', { class: 'palette' });
    const byCategory = new Map<string, CodeEntry[]>();
    for (const code of this.codes) {
      const group = byCategory.get(code.category) ?? [];
      group.push(code);
      byCategory.set(code.category, group);
    }
    for (const [category, group] of byCategory) {
      const fieldset = el(doc, 'fieldset', { class: 'palette-group', 'data-category': category }, [
        el(doc, 'legend', {}, [category]),
      ]);
      for (const code of group) {
        const button = el(
          doc,
          'button',
          { type: 'button', 'data-code': code.code, title: code.description },
          [code.code],
        );
        button.addEventListener('click', () => this.pickCode(code.code));
        fieldset.append(button);
      }
      palette.append(fieldset);
    }
    return palette;
  }

  private captureSelection(paragraphIndex: number, draftBox: HTMLElement): void {
    const selection = this.doc.defaultView?.getSelection();
    if (!selection || selection.isCollapsed) return;
    const text = selection.toString();
    const anchorOffset = Math.min(selection.anchorOffset, selection.focusOffset);
    if (!text || !draftBox.textContent?.includes(text)) return;
    this.setSpan(paragraphIndex, text, anchorOffset);
  }

  /** Selection entry point; also the hook scripted tests drive directly. */
  setSpan(paragraphIndex: number, spanText: string, startOffset?: number): void {
    const panel = this.panels.get(paragraphIndex);
    if (!panel) throw new Error(`no paragraph ${paragraphIndex}`);
    const start = startOffset ?? panel.draftText.indexOf(spanText);
    if (start < 0 || !spanText) return;
    this.activeParagraph = paragraphIndex;
    this.pending.paragraphIndex = paragraphIndex;
    this.pending.span = spanText;
    this.pending.occurrence = occurrenceAt(panel.draftText, spanText, start);
    this.spanLabel.textContent = `"${spanText}" (occurrence ${this.pending.occurrence})`;
  }

  pickCode(code: string): void {
    this.pending.code = code;
    for (const button of this.root.querySelectorAll('[data-code]')) {
      button.classList.toggle('selected', button.getAttribute('data-code') === code);
    }
  }

  addAnnotation(): AnnotationDraft | null {
    const { span, occurrence, code } = this.pending;
    if (!span || !occurrence || !code) return null;
    const draft: AnnotationDraft = {
      paragraphIndex: this.pending.paragraphIndex ?? this.activeParagraph,
      span,
      occurrence,
      code,
      suggestion: this.suggestionInput.value ?? '',
      rationale: this.rationaleInput.value ?? '',
    };
    const panel = this.panels.get(draft.paragraphIndex)!;
    panel.rows.push(draft);
    const doc = this.doc;
    const row = el(doc, 'li', { class: 'annotation-row' }, [
      `"${draft.span}"@${draft.occurrence} ${draft.code} ${draft.suggestion}`,
    ]);
    const remove = el(doc, 'button', { type: 'button' }, ['×']);
    remove.addEventListener('click', () => {
      panel.rows.splice(panel.rows.indexOf(draft), 1);
      row.remove();
    });
    row.append(remove);
    panel.rowList.append(row);
    this.pending = {};
    this.spanLabel.textContent = '(select a span)';
    this.suggestionInput.value = '';
    this.rationaleInput.value = '';
    return draft;
  }

  recordsFor(paragraphIndex: number): string {
    const panel = this.panels.get(paragraphIndex);
    return panel ? serializeAnnotations(panel.rows) : '';
  }

  async submitParagraph(paragraphIndex: number): Promise<boolean> {
    const panel = this.panels.get(paragraphIndex);
    if (!panel) return false;
    panel.errorBox.textContent = '';
    try {
      await this.api.submitAnnotations(this.view.job_id, paragraphIndex, serializeAnnotations(panel.rows));
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        panel.errorBox.textContent = error.message;
        return false;
      }
      throw error;
    }
  }

  async finishRound(): Promise<boolean> {
    // Re-submit the active paragraph's records with the round flag; the
    // server replaces prior submissions idempotently.
    const paragraphIndex = this.activeParagraph;
    const panel = this.panels.get(paragraphIndex) ?? this.panels.get(0);
    if (!panel) return false;
    panel.errorBox.textContent = '';
    try {
      await this.api.submitAnnotations(
        this.view.job_id,
        panel.index,
        serializeAnnotations(panel.rows),
        true,
      );
      this.callbacks.onResumed?.();
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        panel.errorBox.textContent = error.message;
        return false;
      }
      throw error;
    }
  }
}
