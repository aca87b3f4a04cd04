/**
 * Client-side annotation record serialization.
 *
 * This is the one piece of business logic duplicated from the server, and it
 * must stay byte-identical to the server's canonical form:
 *
 *   ERR: "<span>"@<occurrence> | <CODE> | <suggestion> | <rationale>
 *
 * Parity is enforced by a fixture test generated from the server serializer.
 */

export interface AnnotationDraft {
  paragraphIndex: number;
  span: string;
  occurrence: number;
  code: string;
  suggestion: string;
  rationale: string;
}

export function serializeAnnotation(a: AnnotationDraft): string {
  return `ERR: "${a.span}"@${a.occurrence} | ${a.code} | ${a.suggestion} | ${a.rationale}`;
}

export function serializeAnnotations(drafts: AnnotationDraft[]): string {
  return drafts.map(serializeAnnotation).join('\n');
}

/** Non-overlapping occurrence count of `span` in `text`, like the server's. */
export function countOccurrences(text: string, span: string): number {
  if (!span) return 0;
  let count = 0;
  let index = text.indexOf(span);
  while (index !== -1) {
    count += 1;
    index = text.indexOf(span, index + span.length);
  }
  return count;
}

/** 1-based occurrence index of the span instance starting at `spanStart`. */
export function occurrenceAt(text: string, span: string, spanStart: number): number {
  return countOccurrences(text.slice(0, spanStart), span) + 1;
}
