"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
malformed inputs, parse failures, no convergence).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import (
    chart,
    editor,
    fileio,
    harvest,
    hierarchy,
    lexgram,
    mapping,
    pipeline,
    rules,
    siggen,
)


def _add_common(p, *flags):
    spec = {
        "hierarchy": ("--hierarchy", "sort hierarchy file (isa clauses)"),
        "grammar": ("--grammar", "grammar rule file"),
        "lexicon": ("--lexicon", "lexicon file"),
        "rules": ("--rules", "sort rule file"),
        "corpus": ("--corpus", "corpus file (id<TAB>sentence lines)"),
        "out": ("--out", "output directory"),
    }
    for name in flags:
        flag, help_text = spec[name]
        p.add_argument(flag, required=True, help=help_text)
    if "mode" in flags:
        raise AssertionError  # mode is added separately, optional
    return p


def _add_mode(p):
    p.add_argument(
        "--mode",
        choices=[harvest.MODE_LFS, harvest.MODE_PLFS],
        default=harvest.MODE_PLFS,
        help="harvest every analysis (lfs) or only the preferred one (plfs)",
    )


def build_parser():
    top = argparse.ArgumentParser(
        prog="sortacq", description="corpus-driven sortal rule acquisition"
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("siggen", help="generate signatures from a lexicon")
    _add_common(p, "hierarchy", "grammar", "lexicon", "out")
    p.add_argument("--names", required=True, help="constant name sort table")
    p.add_argument("--hand", help="hand-written signatures merged on top")

    p = sub.add_parser("parse", help="parse a corpus and report analyses")
    _add_common(p, "hierarchy", "grammar", "lexicon", "rules", "corpus", "out")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("harvest", help="parse and extract rule statistics")
    _add_common(p, "hierarchy", "grammar", "lexicon", "rules", "corpus", "out")
    _add_mode(p)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("probabilities", help="fill probabilities in a harvest file")
    p.add_argument("--stats", required=True, help="harvest statistics file")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("filter", help="drop rules below a probability threshold")
    p.add_argument("--stats", required=True, help="harvest statistics file")
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--family", choices=sorted(pipeline.FAMILY_FIELDS), default="global")
    p.add_argument("--threshold", required=True)

    p = sub.add_parser("map", help="map a rule file against a reference")
    _add_common(p, "hierarchy", "rules", "out")
    p.add_argument("--reference", required=True)
    p.add_argument("--closure", action="store_true",
                   help="expand atoms one hierarchy level on both sides first")

    p = sub.add_parser("iterate", help="run the acquisition loop to fixpoint")
    _add_common(p, "hierarchy", "grammar", "lexicon", "rules", "corpus", "out")
    _add_mode(p)
    p.add_argument("--family", choices=sorted(pipeline.FAMILY_FIELDS), default="global")
    p.add_argument("--threshold")
    p.add_argument("--max-iterations", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("diff", help="set difference of two rule files")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--hierarchy")

    p = sub.add_parser("serve", help="serve the editor API over a workspace")
    p.add_argument("--workspace", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8377)
    p.add_argument("--rules", help="harvest statistics file to edit")

    return top


def _load_world(args):
    h = hierarchy.load_hierarchy(args.hierarchy)
    grammar = lexgram.load_grammar(args.grammar)
    lexicon = lexgram.load_lexicon(args.lexicon)
    corpus = lexgram.load_corpus(args.corpus)
    return h, grammar, lexicon, corpus


def _parse_results(args, h, grammar, lexicon, corpus):
    rule_list = rules.load_rules(args.rules, h)
    config = chart.ParserConfig(workers=args.workers)
    return chart.parse_corpus(
        corpus, lexgram.lexicon_index(lexicon), grammar, rule_list, h, config
    )


def cmd_siggen(args):
    h = hierarchy.load_hierarchy(args.hierarchy)
    lexicon = lexgram.load_lexicon(args.lexicon)
    names = lexgram.load_names(args.names)
    connectors = lexgram.connector_specs(lexgram.load_grammar(args.grammar), lexicon)
    generated, extended = siggen.generate_signatures(lexicon, names, connectors, h)
    hand = rules.load_rules(args.hand, extended) if args.hand else []
    merged = siggen.merge_signatures(generated, hand)
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "signatures.sor")
    fileio.atomic_write_text(out_path, rules.format_rule_file(merged))
    fileio.atomic_write_text(
        os.path.join(args.out, "hierarchy_extended.isa"),
        hierarchy.format_hierarchy(extended),
    )
    stats = siggen.signature_stats(generated, hand)
    print(f"wrote {out_path}: {stats.total} signatures "
          f"({stats.zero_arity} zero-arity, {stats.hand_added} hand-added)")
    return 0


def cmd_parse(args):
    h, grammar, lexicon, corpus = _load_world(args)
    results = _parse_results(args, h, grammar, lexicon, corpus)
    lines = []
    parsed = 0
    for r in results:
        if r.error is not None or r.plf is None:
            lines.append(f"{r.sentence.sid}\terror\t{r.error or 'no analyses'}")
            continue
        parsed += 1
        plf = r.plf
        lines.append(
            f"{r.sentence.sid}\t{len(r.analyses)}\t{plf.fragments}\t{plf.text}"
        )
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "parses.tsv")
    fileio.atomic_write_text(out_path, "\n".join(lines) + "\n")
    print(f"wrote {out_path}: parsed {parsed}/{len(results)} sentences")
    return 0


def cmd_harvest(args):
    h, grammar, lexicon, corpus = _load_world(args)
    results = _parse_results(args, h, grammar, lexicon, corpus)
    stats = harvest.compute_probabilities(harvest.harvest_corpus(results, args.mode))
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "harvest.sor")
    harvest.save_stats(out_path, stats)
    parsed = sum(1 for r in results if r.error is None)
    print(f"wrote {out_path}: {len(stats)} rules from {parsed} parsed sentences")
    return 0


def cmd_probabilities(args):
    h = hierarchy.load_hierarchy(args.hierarchy)
    stats = harvest.compute_probabilities(harvest.load_stats(args.stats, h))
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "probabilities.sor")
    harvest.save_stats(out_path, stats)
    print(f"wrote {out_path}: {len(stats)} rules")
    return 0


def cmd_filter(args):
    h = hierarchy.load_hierarchy(args.hierarchy)
    stats = harvest.load_stats(args.stats, h)
    kept = pipeline.apply_filter(
        stats, pipeline.ThresholdFilter(args.family, args.threshold)
    )
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "filtered.sor")
    harvest.save_stats(out_path, kept)
    print(f"wrote {out_path}: kept {len(kept)} of {len(stats)} rules")
    return 0


def cmd_map(args):
    h = hierarchy.load_hierarchy(args.hierarchy)
    corpus_rules = rules.load_rules(args.rules, h)
    reference = rules.load_rules(args.reference, h)
    if args.closure:
        corpus_rules = mapping.expand_closure(corpus_rules, h)
        reference = mapping.expand_closure(reference, h)
    report = mapping.map_rules(corpus_rules, reference, h)
    os.makedirs(args.out, exist_ok=True)
    table = mapping.render_report(report)
    fileio.atomic_write_text(os.path.join(args.out, "mapping_report.txt"), table)
    mapping.save_records(os.path.join(args.out, "mapping_records.tsv"), report)
    print(table, end="")
    return 0


def cmd_iterate(args):
    h, grammar, lexicon, corpus = _load_world(args)
    threshold_filter = None
    if args.threshold is not None:
        threshold_filter = pipeline.ThresholdFilter(args.family, args.threshold)
    os.makedirs(args.out, exist_ok=True)
    config = chart.ParserConfig(workers=args.workers)
    with pipeline.workspace_lock(args.out):
        history = pipeline.run_to_convergence(
            pipeline.initial_state(args.rules),
            corpus,
            grammar,
            lexicon,
            h,
            mode=args.mode,
            threshold_filter=threshold_filter,
            out_dir=args.out,
            config=config,
            max_iterations=args.max_iterations,
        )
    for state in history:
        parsed = sum(1 for c in state.sentence_analyses.values() if c > 0)
        print(
            f"iteration {state.iteration - 1}: {len(state.stats)} rules, "
            f"parsed {parsed}/{len(state.sentence_analyses)}, "
            f"wrote {os.path.basename(state.rules_path)}"
        )
    print(f"converged after {len(history)} iterations")
    return 0


def cmd_diff(args):
    h = hierarchy.load_hierarchy(args.hierarchy) if args.hierarchy else None
    diff = pipeline.diff_rule_files(args.old, args.new, h)
    sys.stdout.write(pipeline.format_diff(diff))
    print(f"{len(diff.added)} added, {len(diff.removed)} removed")
    return 0


def cmd_serve(args):
    server = editor.serve(
        args.workspace, host=args.host, port=args.port, stats_path=args.rules
    )
    host, port = server.server_address[:2]
    print(f"editor API for {args.workspace} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


COMMANDS = {
    "siggen": cmd_siggen,
    "parse": cmd_parse,
    "harvest": cmd_harvest,
    "probabilities": cmd_probabilities,
    "filter": cmd_filter,
    "map": cmd_map,
    "iterate": cmd_iterate,
    "diff": cmd_diff,
    "serve": cmd_serve,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; --help exits 0
        return 0 if exc.code == 0 else 1
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
