"""HTTP editing service over a harvested rule workspace.

A session owns one workspace directory (conventional file names:
hierarchy.isa, lexicon.lex, grammar.rules, corpus.txt, signatures.sor,
reference.sor) plus a working set of rules with statistics, loaded
from the newest harvest file unless a path is given.  Rule ids are
stable for the life of the session; deleting never renumbers.

Every mutation appends one JSON line to editor_journal.jsonl.  The
journal is append-only across sessions; a session-start marker records
which file the working set came from, and replaying the entries after
the marker onto that file reproduces the working set (see
replay_journal).  Mutations carry a client op_id: replaying the same
op_id is answered from the journal without reapplying, so retries are
safe.

The HTTP layer is a thin JSON translation of the session methods; the
field names are frozen in docs/api.md.  A threading server handles
concurrent readers, and a session-wide lock serializes mutations.
"""

from __future__ import annotations

import json
import os
import re
import threading
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import chart, harvest, hierarchy, lexgram, mapping, pipeline, rules, terms

JOURNAL_NAME = "editor_journal.jsonl"

FILES = {
    "hierarchy": "hierarchy.isa",
    "lexicon": "lexicon.lex",
    "grammar": "grammar.rules",
    "corpus": "corpus.txt",
    "signatures": "signatures.sor",
    "reference": "reference.sor",
}


class EditorError(ValueError):
    """Data-level request failure; carries an HTTP status."""

    def __init__(self, message, status=400):
        super().__init__(message)
        self.status = status


def _fmt_prob(p):
    return None if p is None else f"{p.numerator / p.denominator:.6f}"


def _fmt_fraction(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


class EditorSession:
    def __init__(self, workspace, stats_path=None):
        self.workspace = str(workspace)
        self.lock = threading.RLock()
        self.hierarchy_path = self._ws_file("hierarchy")
        self.h = hierarchy.load_hierarchy(self.hierarchy_path)
        corpus_path = os.path.join(self.workspace, FILES["corpus"])
        self.corpus = (
            {s.sid: s for s in lexgram.load_corpus(corpus_path)}
            if os.path.exists(corpus_path)
            else None
        )
        if stats_path is not None and not os.path.isabs(stats_path):
            stats_path = os.path.join(self.workspace, stats_path)
        self.stats_path = stats_path or self._newest_harvest()
        self.reference_path = os.path.join(self.workspace, FILES["reference"])
        if not os.path.exists(self.reference_path):
            self.reference_path = None
        self.journal_path = os.path.join(self.workspace, JOURNAL_NAME)
        self._seq = 0
        self._op_results = {}
        self._rows = {}  # id -> RuleStats
        self._categories = {}  # id -> MappingCategory value
        self._order = []  # insertion order of ids, for id stability
        self._next_id = 1
        self._notes = []
        self.dirty = False
        initial = (
            harvest.load_stats(self.stats_path, self.h) if self.stats_path else []
        )
        for stats in initial:
            self._add_row(stats)
        self._journal(
            {"op": "session", "source": self.stats_path or "", "rules": len(self._rows)}
        )

    # -- workspace plumbing

    def _ws_file(self, key):
        path = os.path.join(self.workspace, FILES[key])
        if not os.path.exists(path):
            raise EditorError(f"workspace is missing {FILES[key]}", status=400)
        return path

    def _newest_harvest(self):
        best = None
        for name in os.listdir(self.workspace):
            m = re.fullmatch(r"harvest_iter(\d+)\.sor", name)
            if m and (best is None or int(m.group(1)) > best[0]):
                best = (int(m.group(1)), name)
        if best:
            return os.path.join(self.workspace, best[1])
        plain = os.path.join(self.workspace, "harvest.sor")
        return plain if os.path.exists(plain) else None

    def _journal(self, entry):
        self._seq += 1
        entry = {"seq": self._seq, **entry}
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
        return entry

    def _add_row(self, stats):
        rid = f"r{self._next_id}"
        self._next_id += 1
        self._rows[rid] = stats
        self._order.append(rid)
        return rid

    def _replayed(self, op_id):
        if op_id is not None and op_id in self._op_results:
            return self._op_results[op_id]
        return None

    def _record(self, op_id, result):
        if op_id is not None:
            self._op_results[op_id] = result
        return result

    # -- read side

    def rule_record(self, rid):
        s = self._rows[rid]
        return {
            "id": rid,
            "rule": rules.format_rule(s.rule),
            "predicate": s.rule.predicate,
            "arity": s.rule.arity,
            "invocations": s.invocations,
            "lf_count": s.lf_count,
            "theta_bar": _fmt_fraction(s.theta_bar),
            "p_global": _fmt_prob(s.p_global),
            "p_given_pred": _fmt_prob(s.p_given_pred),
            "p_given_pred_arg1": _fmt_prob(s.p_given_pred_arg1),
            "samples": list(s.sample_sentences),
            "mapping": self._categories.get(rid),
        }

    def _selected_p(self, rid, family):
        value = getattr(self._rows[rid], pipeline.FAMILY_FIELDS[family])
        return value if value is not None else Fraction(-1)

    def list_rules(self, functor=None, family="global", min_p=None, category=None,
                   offset=0, limit=100):
        if family not in pipeline.FAMILY_FIELDS:
            raise EditorError(f"unknown probability family {family!r}")
        if category is not None and category not in {
            c.value for c in mapping.MappingCategory
        }:
            raise EditorError(f"unknown mapping category {category!r}")
        if offset < 0 or limit < 1:
            raise EditorError("offset must be >= 0 and limit >= 1")
        with self.lock:
            ids = list(self._rows)
            if functor is not None:
                ids = [i for i in ids if self._rows[i].rule.predicate == functor]
            if min_p is not None:
                threshold = Fraction(str(min_p))
                ids = [i for i in ids if self._selected_p(i, family) >= threshold]
            if category is not None:
                ids = [i for i in ids if self._categories.get(i) == category]
            ids.sort(
                key=lambda i: (
                    self._rows[i].rule.predicate,
                    -self._selected_p(i, family),
                    rules.format_rule(self._rows[i].rule),
                )
            )
            page = ids[offset : offset + limit]
            return {
                "total": len(ids),
                "offset": offset,
                "limit": limit,
                "rules": [self.rule_record(i) for i in page],
            }

    def get_rule(self, rid):
        with self.lock:
            if rid not in self._rows:
                raise EditorError(f"no rule {rid}", status=404)
            return self.rule_record(rid)

    def rule_sentences(self, rid):
        with self.lock:
            if rid not in self._rows:
                raise EditorError(f"no rule {rid}", status=404)
            if self.corpus is None:
                raise EditorError("workspace has no corpus.txt", status=409)
            out = []
            for sid in self._rows[rid].sample_sentences:
                if sid not in self.corpus:
                    raise EditorError(f"sample sentence {sid} not in corpus")
                out.append({"sid": sid, "text": self.corpus[sid].text})
            return {"id": rid, "sentences": out}

    def functors(self):
        with self.lock:
            counts = {}
            for s in self._rows.values():
                counts[s.rule.predicate] = counts.get(s.rule.predicate, 0) + 1
            return {
                "functors": [
                    {"predicate": p, "rules": n} for p, n in sorted(counts.items())
                ]
            }

    def functors_by_argument(self, sort_name):
        if not self.h.is_node(sort_name):
            raise EditorError(f"unknown sort {sort_name!r}")
        query = terms.Atom(sort_name)
        with self.lock:
            preds = set()
            for s in self._rows.values():
                for arg in s.rule.args:
                    if isinstance(arg, terms.Atom) and terms.subsumes(
                        query, arg, self.h
                    ):
                        preds.add(s.rule.predicate)
                        break
            return {"sort": sort_name, "predicates": sorted(preds)}

    def excluded(self):
        return {"excluded": sorted(harvest.DEFAULT_EXCLUSIONS)}

    def health(self):
        with self.lock:
            return {
                "status": "ok",
                "workspace": self.workspace,
                "rules": len(self._rows),
                "dirty": self.dirty,
            }

    # -- write side

    def delete_rule(self, rid, op_id=None):
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            if rid not in self._rows:
                raise EditorError(f"no rule {rid}", status=404)
            record = self.rule_record(rid)
            del self._rows[rid]
            self._categories.pop(rid, None)
            self._order.remove(rid)
            self.dirty = True
            entry = self._journal({"op": "delete", "id": rid, "op_id": op_id})
            return self._record(op_id, {"deleted": record, "seq": entry["seq"]})

    def insert_rule(self, rule_text, op_id=None):
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            try:
                parsed = rules.parse_rules(rule_text, self.h)
            except Exception as exc:
                raise EditorError(f"rule does not parse: {exc}") from exc
            if len(parsed) != 1:
                raise EditorError("expected exactly one rule clause")
            [rule] = parsed
            canon = rules.format_rule(rule)
            for s in self._rows.values():
                if rules.format_rule(s.rule) == canon:
                    raise EditorError("duplicate rule", status=409)
            # hand-added rules have no corpus evidence yet
            stats = harvest.RuleStats(rule, 0, 0, Fraction(0))
            rid = self._add_row(stats)
            self.dirty = True
            entry = self._journal({"op": "insert", "rule": canon, "op_id": op_id})
            return self._record(op_id, {"rule": self.rule_record(rid), "seq": entry["seq"]})

    def run_mapping(self, reference=None, closure=False, op_id=None):
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            path = reference or self.reference_path
            if path is None:
                raise EditorError("no reference file configured")
            if not os.path.isabs(path):
                path = os.path.join(self.workspace, path)
            if not os.path.exists(path):
                raise EditorError(f"reference file not found: {path}")
            reference_rules = rules.load_rules(path, self.h)
            corpus_rules = [s.rule for s in self._rows.values()]
            if closure:
                corpus_rules = mapping.expand_closure(corpus_rules, self.h)
                reference_rules = mapping.expand_closure(reference_rules, self.h)
            report = mapping.map_rules(corpus_rules, reference_rules, self.h)
            by_canon = {
                rules.format_rule(rule): cat.value for rule, cat in report.assignments
            }
            self._categories = {
                rid: by_canon[rules.format_rule(s.rule)]
                for rid, s in self._rows.items()
                if rules.format_rule(s.rule) in by_canon
            }
            entry = self._journal(
                {"op": "mapping", "reference": path, "closure": bool(closure), "op_id": op_id}
            )
            result = {
                "counts": {c.value: report.counts[c] for c in mapping.MappingCategory},
                "total": report.total,
                "reference_size": report.reference_size,
                "metrics": None
                if report.metrics is None
                else {
                    "precision_low": _fmt_prob(report.metrics.precision_low),
                    "precision_high": _fmt_prob(report.metrics.precision_high),
                    "overgeneration": _fmt_prob(report.metrics.overgeneration),
                    "recall": _fmt_prob(report.metrics.recall),
                },
                "table": mapping.render_report(report),
                "seq": entry["seq"],
            }
            return self._record(op_id, result)

    def save(self, path=None, op_id=None):
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            target = path or self.stats_path
            if target is None:
                raise EditorError("no target path for save")
            if not os.path.isabs(target):
                target = os.path.join(self.workspace, target)
            stats = [self._rows[rid] for rid in self._order]
            harvest.save_stats(target, sorted(stats, key=lambda s: rules.rule_sort_key(s.rule)))
            self.dirty = False
            entry = self._journal({"op": "save", "path": target, "op_id": op_id})
            return self._record(op_id, {"path": target, "rules": len(stats), "seq": entry["seq"]})

    def set_hierarchy(self, path, op_id=None):
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            if not os.path.isabs(path):
                path = os.path.join(self.workspace, path)
            if not os.path.exists(path):
                raise EditorError(f"hierarchy file not found: {path}")
            new_h = hierarchy.load_hierarchy(path)
            for s in self._rows.values():
                for sort in s.rule.args + (s.rule.result,):
                    try:
                        terms.validate_sorts(sort, new_h)
                    except hierarchy.HierarchyError as exc:
                        raise EditorError(
                            f"working set does not fit the new hierarchy: {exc}"
                        ) from exc
            self.h = new_h
            self.hierarchy_path = path
            self._categories = {}  # stale under a different hierarchy
            entry = self._journal({"op": "hierarchy", "path": path, "op_id": op_id})
            return self._record(op_id, {"path": path, "seq": entry["seq"]})

    def whiteboard(self):
        with self.lock:
            return {"notes": list(self._notes)}

    def append_note(self, text, sid=None, rule_id=None, op_id=None):
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            if not isinstance(text, str) or not text.strip():
                raise EditorError("note text must be a non-empty string")
            note = {
                "id": len(self._notes) + 1,
                "text": text,
                "sid": sid,
                "rule_id": rule_id,
            }
            self._notes.append(note)
            entry = self._journal({"op": "note", **note, "op_id": op_id})
            return self._record(op_id, {"note": note, "seq": entry["seq"]})

    def iterate(self, mode=harvest.MODE_PLFS, family=None, threshold=None, op_id=None):
        """Reparse the corpus with the working set and adopt the new harvest."""
        with self.lock:
            done = self._replayed(op_id)
            if done is not None:
                return done
            if self.corpus is None:
                raise EditorError("workspace has no corpus.txt", status=409)
            grammar = lexgram.load_grammar(self._ws_file("grammar"))
            lexicon = lexgram.load_lexicon(self._ws_file("lexicon"))
            threshold_filter = None
            if threshold is not None:
                try:
                    threshold_filter = pipeline.ThresholdFilter(
                        family or "global", threshold
                    )
                except pipeline.PipelineError as exc:
                    raise EditorError(str(exc)) from exc
            # constant sorts are declared, not harvested; the parser
            # still needs them, so they ride in from the signature file
            constants = []
            sig_path = os.path.join(self.workspace, FILES["signatures"])
            if os.path.exists(sig_path):
                constants = [
                    r for r in rules.load_rules(sig_path, self.h) if r.arity == 0
                ]
            active = [self._rows[rid].rule for rid in self._order] + constants
            results = chart.parse_corpus(
                list(self.corpus.values()),
                lexgram.lexicon_index(lexicon),
                grammar,
                active,
                self.h,
            )
            stats = harvest.compute_probabilities(
                harvest.harvest_corpus(results, mode)
            )
            new_stats = pipeline.apply_filter(stats, threshold_filter)
            old_rules = [s.rule for s in self._rows.values()]
            diff = pipeline.diff_rules(old_rules, [s.rule for s in new_stats])
            self._rows = {}
            self._order = []
            self._categories = {}
            for s in sorted(new_stats, key=lambda s: rules.rule_sort_key(s.rule)):
                self._add_row(s)
            self.dirty = True
            entry = self._journal(
                {
                    "op": "iterate",
                    "mode": mode,
                    "family": family,
                    "threshold": None if threshold is None else str(threshold),
                    "op_id": op_id,
                }
            )
            result = {
                "rules": len(self._rows),
                "converged": not diff.added and not diff.removed,
                "added": [rules.format_rule(r) for r in diff.added],
                "removed": [rules.format_rule(r) for r in diff.removed],
                "parsed": sum(1 for r in results if r.error is None),
                "sentences": len(results),
                "seq": entry["seq"],
            }
            return self._record(op_id, result)

    def working_rules(self):
        with self.lock:
            return [rules.format_rule(self._rows[rid].rule) for rid in self._order]


def replay_journal(initial_stats, entries, h):
    """Rebuild the rule working set from a journal slice.

    Only rule-set mutations matter here (delete/insert/iterate); an
    iterate entry cannot be replayed without reparsing, so replay stops
    being meaningful past one — callers slice accordingly.  Returns the
    canonical rule strings in session order.
    """
    rows = {}
    order = []
    next_id = [1]

    def add(stats):
        rid = f"r{next_id[0]}"
        next_id[0] += 1
        rows[rid] = stats
        order.append(rid)

    for stats in initial_stats:
        add(stats)
    seen_ops = set()
    for entry in entries:
        op_id = entry.get("op_id")
        if op_id is not None:
            if op_id in seen_ops:
                continue
            seen_ops.add(op_id)
        if entry["op"] == "delete":
            rid = entry["id"]
            del rows[rid]
            order.remove(rid)
        elif entry["op"] == "insert":
            # journals hold the bare canonical rule, not a clause
            [rule] = rules.parse_rules(entry["rule"] + ".", h)
            add(harvest.RuleStats(rule, 0, 0, Fraction(0)))
    return [rules.format_rule(rows[rid].rule) for rid in order]


def load_journal(path):
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(json.loads(line))
    return entries


# ---------------------------------------------------------------------------
# HTTP layer

class _Handler(BaseHTTPRequestHandler):
    session = None  # bound by make_server

    # route table: (method, exact path or prefix) handled in _dispatch
    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_DELETE(self):
        self._dispatch("DELETE")

    def log_message(self, *args):  # tests stay quiet
        pass

    def _dispatch(self, method):
        url = urlparse(self.path)
        params = {k: v[-1] for k, v in parse_qs(url.query).items()}
        body = {}
        if method == "POST":
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if raw:
                try:
                    body = json.loads(raw)
                except json.JSONDecodeError:
                    return self._send(400, {"error": "body is not valid JSON"})
                if not isinstance(body, dict):
                    return self._send(400, {"error": "body must be a JSON object"})
        try:
            status, payload = self._route(method, url.path, params, body)
        except EditorError as exc:
            return self._send(exc.status, {"error": str(exc)})
        except ValueError as exc:
            return self._send(400, {"error": str(exc)})
        self._send(status, payload)

    def _route(self, method, path, params, body):
        s = self.session
        parts = [p for p in path.split("/") if p]
        if method == "GET" and path == "/health":
            return 200, s.health()
        if method == "GET" and path == "/rules":
            return 200, s.list_rules(
                functor=params.get("functor"),
                family=params.get("family", "global"),
                min_p=params.get("min_p"),
                category=params.get("mapping"),
                offset=int(params.get("offset", 0)),
                limit=int(params.get("limit", 100)),
            )
        if method == "POST" and path == "/rules":
            return 201, s.insert_rule(body.get("rule", ""), op_id=body.get("op_id"))
        if len(parts) == 2 and parts[0] == "rules":
            if method == "GET":
                return 200, s.get_rule(parts[1])
            if method == "DELETE":
                return 200, s.delete_rule(parts[1], op_id=params.get("op_id"))
        if (
            method == "GET"
            and len(parts) == 3
            and parts[0] == "rules"
            and parts[2] == "sentences"
        ):
            return 200, s.rule_sentences(parts[1])
        if method == "GET" and path == "/functors":
            return 200, s.functors()
        if method == "GET" and path == "/functors/by-arg":
            if "sort" not in params:
                raise EditorError("missing sort parameter")
            return 200, s.functors_by_argument(params["sort"])
        if method == "POST" and path == "/mapping":
            return 200, s.run_mapping(
                reference=body.get("reference"),
                closure=bool(body.get("closure", False)),
                op_id=body.get("op_id"),
            )
        if method == "POST" and path == "/save":
            return 200, s.save(path=body.get("path"), op_id=body.get("op_id"))
        if method == "GET" and path == "/excluded":
            return 200, s.excluded()
        if method == "POST" and path == "/hierarchy":
            if "path" not in body:
                raise EditorError("missing path field")
            return 200, s.set_hierarchy(body["path"], op_id=body.get("op_id"))
        if method == "GET" and path == "/whiteboard":
            return 200, s.whiteboard()
        if method == "POST" and path == "/whiteboard":
            return 201, s.append_note(
                body.get("text", ""),
                sid=body.get("sid"),
                rule_id=body.get("rule_id"),
                op_id=body.get("op_id"),
            )
        if method == "POST" and path == "/iterate":
            threshold = body.get("threshold")
            return 200, s.iterate(
                mode=body.get("mode", harvest.MODE_PLFS),
                family=body.get("family"),
                threshold=threshold,
                op_id=body.get("op_id"),
            )
        raise EditorError("no such endpoint", status=404)

    def _send(self, status, payload):
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)


def make_server(session, host="127.0.0.1", port=0):
    handler = type("BoundHandler", (_Handler,), {"session": session})
    return ThreadingHTTPServer((host, port), handler)


def serve(workspace, host="127.0.0.1", port=8377, stats_path=None):
    session = EditorSession(workspace, stats_path=stats_path)
    server = make_server(session, host, port)
    return server
