#!/usr/bin/env python3
"""Serve the rule editor API over a scratch copy of the bundled domain.

Copies data/toy into a working directory, runs one harvest so there are
statistics to edit, then serves HTTP until interrupted.  Pass --workspace
to serve an existing workspace instead (no copy, no harvest).
"""

import argparse
import os
import shutil
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from sortacq import editor, hierarchy, lexgram, pipeline


def prepare_scratch(source, scratch):
    if os.path.exists(scratch):
        shutil.rmtree(scratch)
    shutil.copytree(source, scratch)
    state = pipeline.run_iteration(
        pipeline.initial_state(os.path.join(scratch, "signatures.sor")),
        corpus=lexgram.load_corpus(os.path.join(scratch, "corpus.txt")),
        grammar=lexgram.load_grammar(os.path.join(scratch, "grammar.rules")),
        lexicon=lexgram.load_lexicon(os.path.join(scratch, "lexicon.lex")),
        h=hierarchy.load_hierarchy(os.path.join(scratch, "hierarchy.isa")),
        out_dir=scratch,
    )
    return "harvest_iter1.sor", state


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workspace", help="serve this directory as-is")
    ap.add_argument("--stats", help="statistics file within the workspace")
    ap.add_argument("--scratch", default=os.path.join("build", "editor_ws"))
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8377)
    args = ap.parse_args()

    if args.workspace:
        ws, stats = args.workspace, args.stats
    else:
        ws = args.scratch
        stats, state = prepare_scratch(os.path.join("data", "toy"), ws)
        parsed = sum(1 for c in state.sentence_analyses.values() if c > 0)
        print(f"harvested {len(state.stats)} rules from {parsed} sentences")

    server = editor.serve(ws, host=args.host, port=args.port, stats_path=stats)
    host, port = server.server_address[:2]
    print(f"editing {ws} at http://{host}:{port} (ctrl-c to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
