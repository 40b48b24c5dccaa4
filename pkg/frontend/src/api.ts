/** Typed client for the rule editor HTTP API.
 *
 * Field names mirror the server's JSON exactly; nothing is renamed or
 * recomputed on this side.  Probabilities stay the six-place decimal
 * strings the server sends, theta_bar stays an exact rational string.
 */

export type MappingCategory =
  | "exact"
  | "incompatible"
  | "subsumed_by"
  | "subsumes"
  | "incomparable";

export type Family = "global" | "pred" | "arg1";

export interface RuleRecord {
  id: string;
  rule: string;
  predicate: string;
  arity: number;
  invocations: number;
  lf_count: number;
  theta_bar: string | null;
  p_global: string | null;
  p_given_pred: string | null;
  p_given_pred_arg1: string | null;
  samples: string[];
  mapping: MappingCategory | null;
}

export interface RulesPage {
  total: number;
  offset: number;
  limit: number;
  rules: RuleRecord[];
}

export interface RulesQuery {
  functor?: string;
  family?: Family;
  min_p?: string;
  mapping?: MappingCategory;
  offset?: number;
  limit?: number;
}

export interface Health {
  status: string;
  workspace: string;
  rules: number;
  dirty: boolean;
}

export interface FunctorCount {
  predicate: string;
  rules: number;
}

export interface SentenceRef {
  sid: string;
  text: string;
}

export interface MappingCounts {
  exact: number;
  incompatible: number;
  subsumed_by: number;
  subsumes: number;
  incomparable: number;
}

export interface MappingMetrics {
  precision_low: string;
  precision_high: string;
  overgeneration: string;
  recall: string;
}

export interface MappingResult {
  counts: MappingCounts;
  total: number;
  reference_size: number;
  metrics: MappingMetrics | null;
  table: string;
  seq: number;
}

export interface WhiteboardNote {
  id: number;
  text: string;
  sid: string | null;
  rule_id: string | null;
}

export interface IterateResult {
  rules: number;
  converged: boolean;
  added: string[];
  removed: string[];
  parsed: number;
  sentences: number;
  seq: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function unwrap<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const message =
      body && typeof body.error === "string"
        ? body.error
        : `HTTP ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class EditorClient {
  constructor(
    readonly base: string,
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private get(path: string) {
    return this.fetchImpl(this.base + path);
  }

  private send(method: string, path: string, body: unknown) {
    return this.fetchImpl(this.base + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async health(): Promise<Health> {
    return unwrap(await this.get("/health"));
  }

  async listRules(query: RulesQuery = {}): Promise<RulesPage> {
    const params = new URLSearchParams();
    if (query.functor !== undefined) params.set("functor", query.functor);
    if (query.family !== undefined) params.set("family", query.family);
    if (query.min_p !== undefined) params.set("min_p", query.min_p);
    if (query.mapping !== undefined) params.set("mapping", query.mapping);
    if (query.offset !== undefined) params.set("offset", String(query.offset));
    if (query.limit !== undefined) params.set("limit", String(query.limit));
    const qs = params.toString();
    return unwrap(await this.get(qs ? `/rules?${qs}` : "/rules"));
  }

  async getRule(id: string): Promise<RuleRecord> {
    return unwrap(await this.get(`/rules/${id}`));
  }

  async addRule(
    rule: string,
    opId?: string,
  ): Promise<{ rule: RuleRecord; seq: number }> {
    return unwrap(await this.send("POST", "/rules", { rule, op_id: opId }));
  }

  async deleteRule(
    id: string,
    opId?: string,
  ): Promise<{ deleted: RuleRecord; seq: number }> {
    const suffix = opId ? `?op_id=${encodeURIComponent(opId)}` : "";
    return unwrap(
      await this.fetchImpl(`${this.base}/rules/${id}${suffix}`, {
        method: "DELETE",
      }),
    );
  }

  async sentences(
    id: string,
  ): Promise<{ id: string; sentences: SentenceRef[] }> {
    return unwrap(await this.get(`/rules/${id}/sentences`));
  }

  async functors(): Promise<{ functors: FunctorCount[] }> {
    return unwrap(await this.get("/functors"));
  }

  async functorsByArg(
    sort: string,
  ): Promise<{ sort: string; predicates: string[] }> {
    return unwrap(
      await this.get(`/functors/by-arg?sort=${encodeURIComponent(sort)}`),
    );
  }

  async runMapping(
    options: { reference?: string; closure?: boolean } = {},
    opId?: string,
  ): Promise<MappingResult> {
    return unwrap(
      await this.send("POST", "/mapping", { ...options, op_id: opId }),
    );
  }

  async save(
    path?: string,
    opId?: string,
  ): Promise<{ path: string; rules: number; seq: number }> {
    return unwrap(await this.send("POST", "/save", { path, op_id: opId }));
  }

  async excluded(): Promise<{ excluded: string[] }> {
    return unwrap(await this.get("/excluded"));
  }

  async loadHierarchy(path: string, opId?: string): Promise<{ seq: number }> {
    return unwrap(await this.send("POST", "/hierarchy", { path, op_id: opId }));
  }

  async whiteboard(): Promise<{ notes: WhiteboardNote[] }> {
    return unwrap(await this.get("/whiteboard"));
  }

  async addNote(
    note: { text: string; sid?: string; rule_id?: string },
    opId?: string,
  ): Promise<{ note: WhiteboardNote; seq: number }> {
    return unwrap(
      await this.send("POST", "/whiteboard", { ...note, op_id: opId }),
    );
  }

  async iterate(
    options: { mode?: "lfs" | "plfs"; family?: Family; threshold?: number } = {},
    opId?: string,
  ): Promise<IterateResult> {
    return unwrap(
      await this.send("POST", "/iterate", { ...options, op_id: opId }),
    );
  }
}
