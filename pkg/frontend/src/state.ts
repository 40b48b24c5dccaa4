/** Client-side session state.
 *
 * Holds the working set as served, applies mutations optimistically, and
 * stamps every mutating request with a fresh op_id so a retry after a
 * dropped response replays instead of double-applying.
 */

import {
  ApiError,
  EditorClient,
  type Family,
  type IterateResult,
  type MappingResult,
  type RuleRecord,
  type SentenceRef,
  type WhiteboardNote,
} from "./api.js";
import { filterRules, thresholdPreview, type ThresholdPreview } from "./viewmodel.js";

export interface Filters {
  functor?: string;
  family: Family;
  mapping?: RuleRecord["mapping"];
}

const PAGE = 500;

let opCounter = 0;

export function newOpId(): string {
  opCounter += 1;
  const nonce = Math.random().toString(36).slice(2, 10);
  return `ui-${Date.now().toString(36)}-${opCounter}-${nonce}`;
}

/** Run a mutation, retrying once with the same op_id on network failure. */
async function withRetry<T>(
  send: (opId: string) => Promise<T>,
): Promise<T> {
  const opId = newOpId();
  try {
    return await send(opId);
  } catch (err) {
    if (err instanceof ApiError) throw err;
    return await send(opId);
  }
}

export class SessionStore {
  rules: RuleRecord[] = [];
  filters: Filters = { family: "global" };
  threshold: string | null = null;
  lastMapping: MappingResult | null = null;
  lastIteration: IterateResult | null = null;
  notes: WhiteboardNote[] = [];
  dirty = false;
  error: string | null = null;

  private sentencesCache = new Map<string, SentenceRef[]>();

  constructor(readonly client: EditorClient) {}

  /** Pull the whole working set; filters are applied locally for display. */
  async refresh(): Promise<void> {
    const all: RuleRecord[] = [];
    let offset = 0;
    for (;;) {
      const page = await this.client.listRules({ offset, limit: PAGE });
      all.push(...page.rules);
      offset += page.rules.length;
      if (offset >= page.total || page.rules.length === 0) break;
    }
    this.rules = all;
    const health = await this.client.health();
    this.dirty = health.dirty;
  }

  /** Rows for the table under the current filters and threshold. */
  visibleRules(): RuleRecord[] {
    return filterRules(this.rules, {
      functor: this.filters.functor,
      family: this.filters.family,
      mapping: this.filters.mapping ?? undefined,
      min_p: this.threshold ?? undefined,
    });
  }

  /** Local preview of a threshold before committing it. */
  preview(minP: string): ThresholdPreview {
    return thresholdPreview(this.rules, this.filters.family, minP);
  }

  /** Commit a threshold: the server's filtered listing becomes the view. */
  async commitThreshold(minP: string): Promise<RuleRecord[]> {
    const page = await this.client.listRules({
      family: this.filters.family,
      min_p: minP,
      limit: Math.max(this.rules.length, PAGE),
    });
    this.threshold = minP;
    return page.rules;
  }

  clearThreshold(): void {
    this.threshold = null;
  }

  /** Optimistic delete: drop the row at once, restore it on failure. */
  async deleteRule(id: string): Promise<RuleRecord> {
    const index = this.rules.findIndex((r) => r.id === id);
    if (index < 0) throw new Error(`no such rule in view: ${id}`);
    const [removed] = this.rules.splice(index, 1);
    try {
      const result = await withRetry((opId) =>
        this.client.deleteRule(id, opId),
      );
      this.dirty = true;
      this.sentencesCache.delete(id);
      return result.deleted;
    } catch (err) {
      this.rules.splice(index, 0, removed as RuleRecord);
      throw err;
    }
  }

  async addRule(text: string): Promise<RuleRecord> {
    const result = await withRetry((opId) => this.client.addRule(text, opId));
    this.rules.push(result.rule);
    this.dirty = true;
    return result.rule;
  }

  async sentencesFor(id: string): Promise<SentenceRef[]> {
    const cached = this.sentencesCache.get(id);
    if (cached) return cached;
    const result = await this.client.sentences(id);
    this.sentencesCache.set(id, result.sentences);
    return result.sentences;
  }

  async runMapping(reference?: string, closure = false): Promise<MappingResult> {
    const result = await withRetry((opId) =>
      this.client.runMapping({ reference, closure }, opId),
    );
    this.lastMapping = result;
    await this.refresh();
    return result;
  }

  async save(path?: string): Promise<string> {
    const result = await withRetry((opId) => this.client.save(path, opId));
    this.dirty = false;
    return result.path;
  }

  async iterate(options: {
    mode?: "lfs" | "plfs";
    family?: Family;
    threshold?: number;
  } = {}): Promise<IterateResult> {
    const result = await withRetry((opId) =>
      this.client.iterate(options, opId),
    );
    this.lastIteration = result;
    this.sentencesCache.clear();
    await this.refresh();
    return result;
  }

  async loadWhiteboard(): Promise<WhiteboardNote[]> {
    const result = await this.client.whiteboard();
    this.notes = result.notes;
    return this.notes;
  }

  async addNote(note: {
    text: string;
    sid?: string;
    rule_id?: string;
  }): Promise<WhiteboardNote> {
    const result = await withRetry((opId) => this.client.addNote(note, opId));
    this.notes.push(result.note);
    return result.note;
  }
}
