"""Rule extraction from logical forms and occurrence statistics.

Every non-excluded predication instance in a logical form contributes
one candidate rule built from its argument and result annotations.
Across a parsed corpus we tally, per distinct rule,

    theta      total matching instances,
    lf_count   logical forms containing the rule at least once,
    theta_bar  theta / lf_count,

then derive three probability families from theta_bar: global
(normalized over all rules), per predicate, and per predicate plus
first-argument sort.  All arithmetic is exact; decimals appear only in
the file format.

Harvest files interleave ordinary rule clauses with ``%%`` metadata
comment lines, so a harvest file doubles as a plain rule file for any
reader that skips comments::

    sor(to,([[flight],[city]],[prop])).
    %% theta=4 lfs=2 theta_bar=2 p=0.666667 p_pred=1.000000 p_arg=1.000000 sents=[s1,s4]
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction

from . import fileio, logform, rules

DEFAULT_EXCLUSIONS = frozenset({"and", "equal", "exists", "has_aspect", "qterm", "the"})
SAMPLE_CAP = 5

MODE_LFS = "lfs"
MODE_PLFS = "plfs"


class ExtractionError(ValueError):
    pass


class HarvestFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RuleStats:
    rule: rules.SortRule
    invocations: int
    lf_count: int
    theta_bar: Fraction
    p_global: Fraction | None = None
    p_given_pred: Fraction | None = None
    p_given_pred_arg1: Fraction | None = None
    sample_sentences: tuple = ()


def extract_rules(lf, excluded=DEFAULT_EXCLUSIONS, include_constants=False):
    """All candidate rule instances in *lf*, as a flat multiset.

    Predications yield arity-n rules; constants yield zero-arity rules
    only when *include_constants* is set, since constant sorts are
    declared up front rather than learned from text.  The exclusion
    list applies to both by predicate name.
    """
    out = []
    for node, path in logform.walk(lf):
        if isinstance(node, logform.Predication) and node.predicate not in excluded:
            if node.annotation is None:
                raise ExtractionError(f"unannotated node at {path}")
            args = []
            for i, arg in enumerate(node.args):
                if arg.annotation is None:
                    raise ExtractionError(f"unannotated node at {path}.args[{i}]")
                args.append(arg.annotation)
            out.append(rules.SortRule("sor", node.predicate, tuple(args), node.annotation))
        elif (
            include_constants
            and isinstance(node, logform.Constant)
            and node.name not in excluded
        ):
            if node.annotation is None:
                raise ExtractionError(f"unannotated node at {path}")
            out.append(rules.SortRule("sor", node.name, (), node.annotation))
    return out


def harvest_corpus(
    results,
    mode=MODE_PLFS,
    excluded=DEFAULT_EXCLUSIONS,
    sample_cap=SAMPLE_CAP,
    include_constants=False,
):
    """Tally rule instances over parse results; probabilities stay unset.

    In PLFs mode only each sentence's preferred analysis contributes;
    in LFs mode every analysis does, and lf_count counts analyses, not
    sentences.  Failed sentences contribute nothing.
    """
    if mode not in (MODE_LFS, MODE_PLFS):
        raise ValueError(f"unknown harvest mode {mode!r}")
    theta = {}
    lf_count = {}
    samples = {}
    for result in results:
        if result.error is not None or not result.analyses:
            continue
        analyses = result.analyses if mode == MODE_LFS else (result.plf,)
        for analysis in analyses:
            instances = extract_rules(analysis.lf, excluded, include_constants)
            seen_here = set()
            for rule in instances:
                theta[rule] = theta.get(rule, 0) + 1
                if rule not in seen_here:
                    lf_count[rule] = lf_count.get(rule, 0) + 1
                    seen_here.add(rule)
                ids = samples.setdefault(rule, [])
                if len(ids) < sample_cap and result.sentence.sid not in ids:
                    ids.append(result.sentence.sid)
    out = []
    for rule in theta:
        out.append(
            RuleStats(
                rule,
                invocations=theta[rule],
                lf_count=lf_count[rule],
                theta_bar=Fraction(theta[rule], lf_count[rule]),
                sample_sentences=tuple(samples[rule]),
            )
        )
    return sorted(out, key=lambda s: rules.rule_sort_key(s.rule))


def _arg1_key(rule):
    if rule.arity == 0:
        return None
    return rule.args[0]


def compute_probabilities(stats):
    """Fill the three probability families from theta_bar."""
    total = sum(s.theta_bar for s in stats)
    by_pred = {}
    by_pred_arg1 = {}
    for s in stats:
        by_pred[s.rule.predicate] = by_pred.get(s.rule.predicate, 0) + s.theta_bar
        key = (s.rule.predicate, _arg1_key(s.rule))
        by_pred_arg1[key] = by_pred_arg1.get(key, 0) + s.theta_bar
    out = []
    for s in stats:
        out.append(
            replace(
                s,
                p_global=s.theta_bar / total,
                p_given_pred=s.theta_bar / by_pred[s.rule.predicate],
                p_given_pred_arg1=s.theta_bar
                / by_pred_arg1[(s.rule.predicate, _arg1_key(s.rule))],
            )
        )
    return out


# ---------------------------------------------------------------------------
# File format

def _fmt_fraction(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _fmt_prob(p):
    return f"{p.numerator / p.denominator:.6f}"


def format_stats(stats):
    lines = []
    for s in stats:
        lines.append(rules.format_rule(s.rule) + ".")
        meta = [
            f"theta={s.invocations}",
            f"lfs={s.lf_count}",
            f"theta_bar={_fmt_fraction(s.theta_bar)}",
        ]
        if s.p_global is not None:
            meta += [
                f"p={_fmt_prob(s.p_global)}",
                f"p_pred={_fmt_prob(s.p_given_pred)}",
                f"p_arg={_fmt_prob(s.p_given_pred_arg1)}",
            ]
        meta.append("sents=[" + ",".join(s.sample_sentences) + "]")
        lines.append("%% " + " ".join(meta))
    return "\n".join(lines) + "\n" if lines else ""


_META_RE = re.compile(r"(\w+)=(\[[^\]]*\]|\S+)")


def parse_stats(text, h=None):
    """Read a harvest file; the probability fields may be absent."""
    out = []
    pending = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%%"):
            if pending is None:
                raise HarvestFormatError(f"line {lineno}: metadata without a rule")
            out.append(_stats_from_meta(pending, line[2:], lineno))
            pending = None
            continue
        if line.startswith("%"):
            continue
        if pending is not None:
            raise HarvestFormatError(f"line {lineno - 1}: rule without metadata")
        [pending] = rules.parse_rules(line, h)
    if pending is not None:
        raise HarvestFormatError("trailing rule without metadata")
    return out


def _stats_from_meta(rule, meta_text, lineno):
    fields = dict(_META_RE.findall(meta_text))
    try:
        theta = int(fields["theta"])
        lf_count = int(fields["lfs"])
        theta_bar = Fraction(fields["theta_bar"])
        sents = fields["sents"].strip("[]")
        samples = tuple(s for s in sents.split(",") if s)
        probs = {}
        for key, name in (("p", "p_global"), ("p_pred", "p_given_pred"), ("p_arg", "p_given_pred_arg1")):
            probs[name] = Fraction(fields[key]) if key in fields else None
    except (KeyError, ValueError) as exc:
        raise HarvestFormatError(f"line {lineno}: bad metadata ({exc})") from exc
    return RuleStats(rule, theta, lf_count, theta_bar, sample_sentences=samples, **probs)


def load_stats(path, h=None):
    return parse_stats(fileio.read_text(path), h)


def save_stats(path, stats):
    fileio.atomic_write_text(path, format_stats(stats))
