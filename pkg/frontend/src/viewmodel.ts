/** Pure view models for the editor UI.
 *
 * Everything here works on records exactly as the server sent them.  The
 * threshold preview and the table ordering mirror the server's listing
 * semantics so that a local preview and a committed server query agree;
 * they operate at the six-decimal display precision, which is all the
 * client ever sees.
 */

import type {
  Family,
  IterateResult,
  MappingCategory,
  MappingResult,
  RuleRecord,
  SentenceRef,
  WhiteboardNote,
} from "./api.js";

const FAMILY_FIELDS: Record<Family, keyof RuleRecord> = {
  global: "p_global",
  pred: "p_given_pred",
  arg1: "p_given_pred_arg1",
};

export function selectedProbability(
  record: RuleRecord,
  family: Family,
): string | null {
  return record[FAMILY_FIELDS[family]] as string | null;
}

/** Exact comparison of plain decimal strings like "0.057143" or "-1". */
export function decimalCmp(a: string, b: string): number {
  const [an, ad] = decimalParts(a);
  const [bn, bd] = decimalParts(b);
  const left = an * bd;
  const right = bn * ad;
  return left < right ? -1 : left > right ? 1 : 0;
}

function decimalParts(text: string): [bigint, bigint] {
  const m = /^(-?)(\d*)(?:\.(\d+))?$/.exec(text.trim());
  if (!m || (!m[2] && !m[3])) {
    throw new Error(`not a decimal: ${JSON.stringify(text)}`);
  }
  const digits = (m[2] ?? "") + (m[3] ?? "");
  const numerator = BigInt(digits) * (m[1] === "-" ? -1n : 1n);
  return [numerator, 10n ** BigInt((m[3] ?? "").length)];
}

/** Missing probabilities sort below every real one, as on the server. */
const ABSENT = "-1";

export function ruleComparator(family: Family) {
  return (a: RuleRecord, b: RuleRecord): number => {
    if (a.predicate !== b.predicate) {
      return a.predicate < b.predicate ? -1 : 1;
    }
    const byP = decimalCmp(
      selectedProbability(b, family) ?? ABSENT,
      selectedProbability(a, family) ?? ABSENT,
    );
    if (byP !== 0) return byP;
    return a.rule < b.rule ? -1 : a.rule > b.rule ? 1 : 0;
  };
}

export interface ListQuery {
  functor?: string;
  family?: Family;
  min_p?: string;
  mapping?: MappingCategory;
}

/** Local counterpart of GET /rules over an already-loaded working set. */
export function filterRules(
  records: readonly RuleRecord[],
  query: ListQuery = {},
): RuleRecord[] {
  const family = query.family ?? "global";
  const out = records.filter((r) => {
    if (query.functor !== undefined && r.predicate !== query.functor) {
      return false;
    }
    if (query.min_p !== undefined) {
      const p = selectedProbability(r, family) ?? ABSENT;
      if (decimalCmp(p, query.min_p) < 0) return false;
    }
    if (query.mapping !== undefined && r.mapping !== query.mapping) {
      return false;
    }
    return true;
  });
  out.sort(ruleComparator(family));
  return out;
}

export interface ThresholdPreview {
  kept: RuleRecord[];
  removed: RuleRecord[];
}

/** Split the working set the way a committed min_p query would. */
export function thresholdPreview(
  records: readonly RuleRecord[],
  family: Family,
  minP: string,
): ThresholdPreview {
  const kept = filterRules(records, { family, min_p: minP });
  const keptIds = new Set(kept.map((r) => r.id));
  const removed = records.filter((r) => !keptIds.has(r.id));
  removed.sort(ruleComparator(family));
  return { kept, removed };
}

export interface TableRow {
  id: string;
  rule: string;
  predicate: string;
  invocations: number;
  thetaBar: string;
  probability: string;
  mapping: string;
}

export function tableRows(
  records: readonly RuleRecord[],
  family: Family,
): TableRow[] {
  return records.map((r) => ({
    id: r.id,
    rule: r.rule,
    predicate: r.predicate,
    invocations: r.invocations,
    thetaBar: r.theta_bar ?? "",
    probability: selectedProbability(r, family) ?? "",
    mapping: r.mapping ?? "",
  }));
}

export interface DetailView {
  id: string;
  rule: string;
  predicate: string;
  arity: number;
  invocations: number;
  lfCount: number;
  thetaBar: string;
  probabilities: { label: string; value: string }[];
  mapping: string;
  evidence: SentenceRef[];
}

export function detailView(
  record: RuleRecord,
  evidence: SentenceRef[] = [],
): DetailView {
  const show = (p: string | null) => p ?? "not computed";
  return {
    id: record.id,
    rule: record.rule,
    predicate: record.predicate,
    arity: record.arity,
    invocations: record.invocations,
    lfCount: record.lf_count,
    thetaBar: record.theta_bar ?? "not computed",
    probabilities: [
      { label: "global", value: show(record.p_global) },
      { label: "given predicate", value: show(record.p_given_pred) },
      {
        label: "given predicate and first argument",
        value: show(record.p_given_pred_arg1),
      },
    ],
    mapping: record.mapping ?? "unmapped",
    evidence,
  };
}

const CATEGORY_LABELS: Record<MappingCategory, string> = {
  exact: "Exact",
  incompatible: "Incompatible",
  subsumed_by: "Subsumed by",
  subsumes: "Subsumes",
  incomparable: "Incomparable",
};

const CATEGORY_ORDER: MappingCategory[] = [
  "exact",
  "incompatible",
  "subsumed_by",
  "subsumes",
  "incomparable",
];

export function formatPercent(decimal: string): string {
  return `${(Number(decimal) * 100).toFixed(1)}%`;
}

export interface MappingView {
  rows: { label: string; count: number }[];
  metrics: { label: string; value: string }[];
  tableText: string;
}

export function mappingView(result: MappingResult): MappingView {
  const rows = CATEGORY_ORDER.map((c) => ({
    label: CATEGORY_LABELS[c],
    count: result.counts[c],
  }));
  rows.push({ label: "Total", count: result.total });
  const metrics =
    result.metrics === null
      ? []
      : [
          {
            label: "precision (exact)",
            value: formatPercent(result.metrics.precision_low),
          },
          {
            label: "precision (+subsumed by)",
            value: formatPercent(result.metrics.precision_high),
          },
          {
            label: "overgeneration",
            value: formatPercent(result.metrics.overgeneration),
          },
          { label: "recall", value: formatPercent(result.metrics.recall) },
        ];
  return { rows, metrics, tableText: result.table };
}

export interface IterateSummary {
  headline: string;
  parsedLine: string;
  diff: string[];
}

export function iterateSummary(result: IterateResult): IterateSummary {
  const headline = result.converged
    ? "converged: working set unchanged"
    : `${result.added.length} added, ${result.removed.length} removed`;
  return {
    headline,
    parsedLine: `parsed ${result.parsed}/${result.sentences} sentences, ${result.rules} rules`,
    diff: [
      ...result.removed.map((t) => `- ${t}.`),
      ...result.added.map((t) => `+ ${t}.`),
    ],
  };
}

export function noteLine(note: WhiteboardNote): string {
  const tags = [
    ...(note.sid ? [`sentence ${note.sid}`] : []),
    ...(note.rule_id ? [`rule ${note.rule_id}`] : []),
  ];
  const suffix = tags.length ? ` (${tags.join(", ")})` : "";
  return `#${note.id} ${note.text}${suffix}`;
}
