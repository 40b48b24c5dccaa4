#!/usr/bin/env python3
"""Run the full acquisition loop on the bundled flight domain.

Regenerates signatures from the lexicon, iterates parse/harvest/feed-back
until the rule set stops changing, then scores the result against the
bundled reference in both harvest modes.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from sortacq import chart, harvest, hierarchy, lexgram, mapping, pipeline, rules, siggen


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workspace", default=os.path.join("data", "toy"))
    ap.add_argument("--out", default=os.path.join("build", "toy_run"))
    ap.add_argument("--mode", choices=["lfs", "plfs"], default="plfs")
    args = ap.parse_args()

    ws = args.workspace
    os.makedirs(args.out, exist_ok=True)

    h = hierarchy.load_hierarchy(os.path.join(ws, "hierarchy.isa"))
    grammar = lexgram.load_grammar(os.path.join(ws, "grammar.rules"))
    lexicon = lexgram.load_lexicon(os.path.join(ws, "lexicon.lex"))
    corpus = lexgram.load_corpus(os.path.join(ws, "corpus.txt"))
    names = lexgram.load_names(os.path.join(ws, "names.tbl"))
    hand = rules.load_rules(os.path.join(ws, "hand.sor"), h)

    generated, h = siggen.generate_signatures(
        lexicon, names, lexgram.connector_specs(grammar, lexicon), h
    )
    signatures = siggen.merge_signatures(generated, hand)
    sig_path = os.path.join(args.out, "signatures.sor")
    with open(sig_path, "w") as fh:
        fh.write(rules.format_rule_file(signatures))
    print(f"signatures: {len(signatures)} rules -> {sig_path}")

    with pipeline.workspace_lock(args.out):
        history = pipeline.run_to_convergence(
            pipeline.initial_state(sig_path),
            corpus,
            grammar,
            lexicon,
            h,
            mode=args.mode,
            out_dir=args.out,
        )
    for state in history:
        parsed = sum(1 for c in state.sentence_analyses.values() if c > 0)
        print(
            f"iteration {state.iteration - 1}: harvested {len(state.stats)} rules,"
            f" parsed {parsed}/{len(state.sentence_analyses)}"
        )
    print(f"fixpoint after {len(history)} iterations\n")

    reference = rules.load_rules(os.path.join(ws, "reference.sor"), h)
    results = chart.parse_corpus(
        corpus, lexgram.lexicon_index(lexicon), grammar, signatures, h,
        chart.ParserConfig(),
    )
    for mode in ("plfs", "lfs"):
        stats = harvest.harvest_corpus(results, mode)
        report = mapping.map_rules([s.rule for s in stats], reference, h)
        print(f"--- mapping, {mode} harvest ---")
        print(mapping.render_report(report))


if __name__ == "__main__":
    main()
