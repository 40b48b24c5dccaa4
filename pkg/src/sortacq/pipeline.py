"""The acquisition loop: parse, harvest, filter, emit a new rule file.

Iteration 1 parses the corpus with the generated signature file; every
pass after that uses the file the previous pass wrote.  A pass leaves
two artifacts in the output directory:

    harvest_iterN.sor    full harvest with probabilities
    rules_iterN+1.sor    kept harvested rules plus the zero-arity
                         rules carried over from the active file

Zero-arity rules never come out of a harvest (constant sorts are
declared, not learned) but the parser needs them to annotate names,
determiners, and tool words, so they ride along unchanged.  The loop
has converged when the new rule set equals the active one up to
canonical renaming and order, in which case the files are identical.
"""

from __future__ import annotations

import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

from . import chart, fileio, harvest, lexgram, rules

log = logging.getLogger(__name__)


class PipelineError(ValueError):
    pass


# probability family name (as on the command line) -> RuleStats field
FAMILY_FIELDS = {
    "global": "p_global",
    "pred": "p_given_pred",
    "arg1": "p_given_pred_arg1",
}


@dataclass(frozen=True)
class ThresholdFilter:
    family: str
    threshold: Fraction

    def __post_init__(self):
        if self.family not in FAMILY_FIELDS:
            raise PipelineError(f"unknown probability family {self.family!r}")
        # decimal thresholds compare exactly against the exact probabilities
        if not isinstance(self.threshold, Fraction):
            object.__setattr__(self, "threshold", Fraction(str(self.threshold)))
        if not 0 <= self.threshold <= 1:
            raise PipelineError("threshold must lie in [0, 1]")


def apply_filter(stats, threshold_filter):
    """Keep the rules whose selected probability is at least the threshold."""
    if threshold_filter is None:
        return list(stats)
    name = FAMILY_FIELDS[threshold_filter.family]
    kept = []
    for s in stats:
        p = getattr(s, name)
        if p is None:
            raise PipelineError("probabilities not computed")
        if p >= threshold_filter.threshold:
            kept.append(s)
    return kept


@dataclass(frozen=True)
class IterationState:
    iteration: int  # 1-based; 1 means the signature file is active
    rules_path: str
    stats: tuple = ()  # harvest of the pass that produced this state
    sentence_analyses: dict = field(default_factory=dict)  # sid -> count
    converged: bool = False


def initial_state(signature_path):
    return IterationState(iteration=1, rules_path=str(signature_path))


def run_iteration(
    state,
    corpus,
    grammar,
    lexicon,
    h,
    mode=harvest.MODE_PLFS,
    threshold_filter=None,
    out_dir=None,
    config=chart.ParserConfig(),
):
    """Run one pass and return the state for the next one."""
    if state.iteration < 1:
        raise PipelineError("iteration numbers start at 1")
    active = rules.load_rules(state.rules_path, h)
    results = chart.parse_corpus(
        corpus, lexgram.lexicon_index(lexicon), grammar, active, h, config
    )
    if all(r.error is not None for r in results):
        raise PipelineError("no sentence in the corpus parses")
    counts = {r.sentence.sid: len(r.analyses) for r in results}
    stats = harvest.compute_probabilities(harvest.harvest_corpus(results, mode))
    if not stats:
        log.warning("iteration %d harvested nothing", state.iteration)
    kept = apply_filter(stats, threshold_filter)

    carried = [r for r in active if r.arity == 0]
    new_rules = _dedup([s.rule for s in kept] + carried)
    out_dir = str(out_dir) if out_dir is not None else os.path.dirname(
        os.path.abspath(state.rules_path)
    )
    harvest_path = os.path.join(out_dir, f"harvest_iter{state.iteration}.sor")
    next_path = os.path.join(out_dir, f"rules_iter{state.iteration + 1}.sor")
    harvest.save_stats(harvest_path, stats)
    fileio.atomic_write_text(next_path, rules.format_rule_file(new_rules))
    return IterationState(
        iteration=state.iteration + 1,
        rules_path=next_path,
        stats=tuple(stats),
        sentence_analyses=counts,
        converged=rules.canonical_set(new_rules) == rules.canonical_set(active),
    )


def run_to_convergence(
    state,
    corpus,
    grammar,
    lexicon,
    h,
    mode=harvest.MODE_PLFS,
    threshold_filter=None,
    out_dir=None,
    config=chart.ParserConfig(),
    max_iterations=10,
):
    """Iterate until fixpoint; returns one state per executed pass."""
    history = []
    for _ in range(max_iterations):
        state = run_iteration(
            state, corpus, grammar, lexicon, h, mode, threshold_filter, out_dir, config
        )
        history.append(state)
        if state.converged:
            return history
    raise PipelineError(f"no fixpoint within {max_iterations} iterations")


def _dedup(rule_list):
    seen = {}
    for rule in rule_list:
        seen.setdefault(rules.format_rule(rule), rule)
    return sorted(seen.values(), key=rules.rule_sort_key)


# ---------------------------------------------------------------------------
# Workspace locking

LOCK_NAME = ".sortacq.lock"


@contextmanager
def workspace_lock(directory):
    """One pipeline run at a time per workspace directory."""
    path = os.path.join(str(directory), LOCK_NAME)
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise PipelineError(f"workspace is locked ({path})") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield path
    finally:
        if os.path.exists(path):
            os.unlink(path)


# ---------------------------------------------------------------------------
# Rule file diffing

@dataclass(frozen=True)
class RuleDiff:
    added: tuple
    removed: tuple


def diff_rules(old, new):
    old_keys = rules.canonical_set(old)
    new_keys = rules.canonical_set(new)
    added = [r for r in _dedup(new) if rules.format_rule(r) not in old_keys]
    removed = [r for r in _dedup(old) if rules.format_rule(r) not in new_keys]
    return RuleDiff(tuple(added), tuple(removed))


def diff_rule_files(old_path, new_path, h=None):
    return diff_rules(rules.load_rules(old_path, h), rules.load_rules(new_path, h))


def format_diff(diff):
    lines = [f"- {rules.format_rule(r)}." for r in diff.removed]
    lines += [f"+ {rules.format_rule(r)}." for r in diff.added]
    return "\n".join(lines) + "\n" if lines else ""
