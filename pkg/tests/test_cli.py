"""The command line, exercised end to end on a temporary workspace."""

import json
import re
import subprocess
import sys
import urllib.request
from fractions import Fraction

import pytest

import minidomain
from sortacq import cli, harvest, hierarchy, mapping, rules

CORPUS = [
    "flights",
    "a departing flight",
    "the morning flights flying to denver",
    "flights to cities on friday",
    "cheap flights to boston",
    "denver flights",
    "flights denver",
    "flying to denver",
    "morning flights",
    "flights to denver",
]

REFERENCE_TEXT = """
    signature(to, ([[flight], [location]], [prop])).
    signature(on, ([[flight], [day]], [prop])).
    signature(fly, ([[flight]], [prop])).
    signature(flight, ([[flight]], [prop])).
    """

NAMES_TEXT = "name_sort('DENVER', [city]).\nname_sort('BOSTON', [city]).\n"


@pytest.fixture
def ws(tmp_path):
    minidomain.write_workspace(tmp_path, CORPUS, reference_text=REFERENCE_TEXT)
    (tmp_path / "names.tbl").write_text(NAMES_TEXT)
    return tmp_path


def run(*args):
    return cli.main([str(a) for a in args])


def common(ws, *names):
    flags = []
    for name in names:
        flags += [f"--{name}", ws / f"{name}.{EXT[name]}"]
    return flags


EXT = {"hierarchy": "isa", "lexicon": "lex", "grammar": "rules", "corpus": "txt"}


class TestUsage:
    def test_no_subcommand_is_a_usage_error(self, capsys):
        assert run() == 1
        capsys.readouterr()

    def test_unknown_subcommand_is_a_usage_error(self, capsys):
        assert run("polish") == 1
        capsys.readouterr()

    def test_missing_required_flag_is_a_usage_error(self, capsys):
        assert run("parse", "--corpus", "x") == 1
        capsys.readouterr()

    def test_help_exits_clean(self, capsys):
        assert run("--help") == 0
        assert "siggen" in capsys.readouterr().out


class TestSiggen:
    def test_writes_signatures_and_extended_hierarchy(self, ws, capsys):
        out = ws / "gen"
        code = run(
            "siggen", *common(ws, "hierarchy", "grammar", "lexicon"),
            "--names", ws / "names.tbl", "--out", out,
        )
        assert code == 0
        assert "signatures" in capsys.readouterr().out
        extended = hierarchy.load_hierarchy(out / "hierarchy_extended.isa")
        generated = rules.load_rules(out / "signatures.sor", extended)
        preds = {r.predicate for r in generated}
        assert {"flight", "to", "DENVER", "frag_np", "has_aspect"} <= preds

    def test_hand_rules_override_generated_ones(self, ws, tmp_path):
        hand = tmp_path / "hand.sor"
        hand.write_text("signature(to, ([[flight], [city]], [prop])).\n")
        out = ws / "gen"
        run(
            "siggen", *common(ws, "hierarchy", "grammar", "lexicon"),
            "--names", ws / "names.tbl", "--hand", hand, "--out", out,
        )
        text = (out / "signatures.sor").read_text()
        assert "signature(to,([[flight],[city]],[prop]))." in text


class TestParse:
    def test_tsv_row_per_sentence(self, ws, capsys):
        out = ws / "parses"
        code = run(
            "parse", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out,
        )
        assert code == 0
        assert "10/10" in capsys.readouterr().out
        rows = (out / "parses.tsv").read_text().splitlines()
        assert [r.split("\t")[0] for r in rows] == [f"s{i}" for i in range(1, 11)]
        by_sid = {r.split("\t")[0]: r.split("\t") for r in rows}
        # the classic five-way ambiguous sentence
        assert by_sid["s3"][1] == "5"

    def test_unknown_word_reported_inline(self, ws, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("s1\tflights\ns2\tzurich\n")
        out = ws / "parses"
        code = run(
            "parse", *common(ws, "hierarchy", "grammar", "lexicon"),
            "--corpus", bad, "--rules", ws / "signatures.sor", "--out", out,
        )
        assert code == 0
        rows = (out / "parses.tsv").read_text().splitlines()
        assert rows[1].startswith("s2\terror\t")


class TestHarvestCommands:
    def test_harvest_writes_stats_with_probabilities(self, ws):
        out = ws / "h"
        code = run(
            "harvest", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out, "--mode", "plfs",
        )
        assert code == 0
        stats = harvest.load_stats(out / "harvest.sor", minidomain.HIERARCHY)
        by_clause = {rules.format_rule(s.rule): s for s in stats}
        flight = by_clause["sor(flight,([[flight]],[prop]))"]
        assert flight.invocations == 9
        assert flight.p_global is not None

    def test_probabilities_fills_missing_fields(self, ws, tmp_path):
        raw = tmp_path / "raw.sor"
        raw.write_text(
            "signature(flight, ([[flight]], [prop])).\n"
            "%% theta=3 lfs=1 theta_bar=3 sents=[s1]\n"
            "signature(city, ([[city]], [prop])).\n"
            "%% theta=1 lfs=1 theta_bar=1 sents=[s4]\n"
        )
        out = ws / "p"
        code = run(
            "probabilities", "--stats", raw,
            "--hierarchy", ws / "hierarchy.isa", "--out", out,
        )
        assert code == 0
        stats = harvest.load_stats(out / "probabilities.sor", minidomain.HIERARCHY)
        by_pred = {s.rule.predicate: s for s in stats}
        assert by_pred["flight"].p_global == Fraction(3, 4)

    def test_filter_keeps_only_confident_rules(self, ws):
        out = ws / "h"
        run(
            "harvest", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out, "--mode", "lfs",
        )
        code = run(
            "filter", "--stats", out / "harvest.sor",
            "--hierarchy", ws / "hierarchy.isa", "--out", out,
            "--family", "pred", "--threshold", "1",
        )
        assert code == 0
        kept = harvest.load_stats(out / "filtered.sor", minidomain.HIERARCHY)
        assert kept and all(s.p_given_pred == 1 for s in kept)
        dropped = {
            s.rule.predicate
            for s in harvest.load_stats(out / "harvest.sor", minidomain.HIERARCHY)
            if s.p_given_pred != 1
        }
        assert dropped == {"on", "n_n_rel", "frag_np", "actor"}


class TestMap:
    def harvested(self, ws):
        out = ws / "h"
        run(
            "harvest", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out, "--mode", "plfs",
        )
        return out / "harvest.sor"

    def test_report_and_records(self, ws, capsys):
        stats_file = self.harvested(ws)
        capsys.readouterr()
        out = ws / "m"
        code = run(
            "map", "--rules", stats_file, "--reference", ws / "reference.sor",
            "--hierarchy", ws / "hierarchy.isa", "--out", out,
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert printed == (out / "mapping_report.txt").read_text()
        assert "Total" in printed
        records = mapping.load_records(out / "mapping_records.tsv", minidomain.HIERARCHY)
        total = int(re.search(r"Total\s+(\d+)", printed).group(1))
        assert len(records) == total

    def test_closure_flag_changes_the_comparison(self, ws, capsys):
        stats_file = self.harvested(ws)
        capsys.readouterr()
        run(
            "map", "--rules", stats_file, "--reference", ws / "reference.sor",
            "--hierarchy", ws / "hierarchy.isa", "--out", ws / "m1",
        )
        plain = capsys.readouterr().out
        code = run(
            "map", "--rules", stats_file, "--reference", ws / "reference.sor",
            "--hierarchy", ws / "hierarchy.isa", "--out", ws / "m2", "--closure",
        )
        assert code == 0
        closed = capsys.readouterr().out
        assert plain != closed


class TestIterate:
    def test_runs_to_fixpoint(self, ws, capsys):
        out = ws / "iters"
        code = run(
            "iterate", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out, "--mode", "plfs",
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert re.search(r"converged after \d+ iterations", printed)
        assert (out / "harvest_iter1.sor").exists()
        assert (out / "rules_iter2.sor").exists()
        assert not (out / ".sortacq.lock").exists()

    def test_locked_workspace_is_a_data_error(self, ws, capsys):
        out = ws / "iters"
        out.mkdir()
        (out / ".sortacq.lock").write_text("held\n")
        code = run(
            "iterate", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out,
        )
        assert code == 2
        assert "locked" in capsys.readouterr().err


class TestDiff:
    def test_prints_added_and_removed(self, tmp_path, capsys):
        old = tmp_path / "old.sor"
        new = tmp_path / "new.sor"
        old.write_text("signature(to, ([X, Y], [prop])).\n")
        new.write_text(
            "signature(to, ([[flight], [city]], [prop])).\n"
        )
        assert run("diff", old, new) == 0
        printed = capsys.readouterr().out
        assert "- signature(to,([A,B],[prop]))." in printed
        assert "+ signature(to,([[flight],[city]],[prop]))." in printed
        assert "1 added, 1 removed" in printed

    def test_identical_files_diff_empty(self, tmp_path, capsys):
        f = tmp_path / "same.sor"
        f.write_text("signature(to, ([X, Y], [prop])).\n")
        assert run("diff", f, f) == 0
        assert "0 added, 0 removed" in capsys.readouterr().out


class TestDataErrors:
    def test_missing_input_file(self, ws, capsys):
        code = run(
            "parse", *common(ws, "hierarchy", "grammar", "lexicon"),
            "--corpus", ws / "nope.txt", "--rules", ws / "signatures.sor",
            "--out", ws / "o",
        )
        assert code == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_malformed_rules_file(self, ws, capsys):
        bad = ws / "broken.sor"
        bad.write_text("signature(to, oops\n")
        code = run(
            "parse", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", bad, "--out", ws / "o",
        )
        assert code == 2
        capsys.readouterr()

    def test_threshold_out_of_range(self, ws, capsys):
        out = ws / "h"
        run(
            "harvest", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
            "--rules", ws / "signatures.sor", "--out", out,
        )
        code = run(
            "filter", "--stats", out / "harvest.sor",
            "--hierarchy", ws / "hierarchy.isa", "--out", out,
            "--threshold", "1.5",
        )
        assert code == 2
        capsys.readouterr()


class TestDeterminism:
    def test_harvest_is_byte_identical_across_runs(self, ws):
        for out in ("h1", "h2"):
            run(
                "harvest", *common(ws, "hierarchy", "grammar", "lexicon", "corpus"),
                "--rules", ws / "signatures.sor", "--out", ws / out,
            )
        a = (ws / "h1" / "harvest.sor").read_bytes()
        assert a == (ws / "h2" / "harvest.sor").read_bytes()


class TestServe:
    # the child's bound port is scraped from its startup banner
    def test_health_over_http(self, ws):
        code = (
            "import sys\n"
            "from sortacq import cli\n"
            f"sys.exit(cli.main(['serve', '--workspace', {str(ws)!r}, '--port', '0']))\n"
        )
        proc = subprocess.Popen(
            [sys.executable, "-u", "-c", code],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
        )
        try:
            banner = proc.stdout.readline()
            m = re.search(r"http://([\d.]+):(\d+)", banner)
            assert m, banner
            with urllib.request.urlopen(
                f"http://{m.group(1)}:{m.group(2)}/health", timeout=10
            ) as resp:
                body = json.load(resp)
            assert body["rules"] >= 0
        finally:
            proc.terminate()
            proc.wait(timeout=10)
