"""Evaluation protocols and metrics for the selection methods.

Two protocols: pseudo-disambiguation (distinguish a noun actually observed
with a verb from a marginal-distribution confounder) and bilingual
target-word selection against gold translations. Both produce an
EvalReport with

    precision      correct / (correct + incorrect)        abstentions excluded
    effectiveness  correct / items                        abstentions counted

plus their standardized versions p^(1/log2 ambiguity), which map a result
at any mean candidate-set size onto the binary-ambiguity scale. A random
baseline whose precision is exactly 1/ambiguity standardizes to exactly
1/2, which is the consistency check for that mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import BilingualTestItem, Distribution, PairCorpus, VerbSlot, sample_noun
from .errors import DataError
from .disambig import Choice

REDRAW_ATTEMPTS = 1000

TSV_HEADER = "method\titems\tcorrect\tincorrect\tabstain\tambiguity\tP\tE\tstdP\tstdE\tseed"


@dataclass(frozen=True)
class PseudoItem:
    """A (verb, observed noun, confounder noun) test triple."""

    verb: VerbSlot
    noun: str
    confounder: str


@dataclass
class EvalReport:
    """Counts and metrics for one evaluation run."""

    method: str
    items: int
    correct: int
    incorrect: int
    abstain: int
    ambiguity: float
    precision: float
    effectiveness: float
    std_precision: float
    std_effectiveness: float
    seed: int

    def tsv_line(self) -> str:
        def num(x: float) -> str:
            return format(x, ".6g")

        return "\t".join(
            [
                self.method,
                str(self.items),
                str(self.correct),
                str(self.incorrect),
                str(self.abstain),
                num(self.ambiguity),
                num(self.precision),
                num(self.effectiveness),
                num(self.std_precision),
                num(self.std_effectiveness),
                str(self.seed),
            ]
        )


def standardize(p: float, ambiguity: float) -> float:
    """Map a precision at the given ambiguity onto the binary scale: p^(1/log2 amb)."""
    if not ambiguity > 1.0:
        raise ValueError(f"ambiguity must be > 1, got {ambiguity}")
    if p == 0.0:
        return 0.0
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    return p ** (1.0 / math.log2(ambiguity))


def mean_ambiguity(items: list[BilingualTestItem]) -> float:
    """Arithmetic mean of candidate-set sizes."""
    if not items:
        raise DataError("cannot take the mean ambiguity of an empty test set")
    return math.fsum(len(item.candidates) for item in items) / len(items)


def make_pseudo_items(
    test_corpus: PairCorpus,
    noun_dist: Distribution,
    count: int,
    rng: np.random.Generator,
    training_corpus: PairCorpus | None = None,
    require_unseen: bool = False,
) -> list[PseudoItem]:
    """Draw pseudo-disambiguation triples.

    (verb, noun) is drawn proportionally to the test corpus pair counts;
    the confounder is drawn from noun_dist and redrawn until it differs
    from the observed noun (and, with require_unseen, until the
    (verb, confounder) pair is absent from the training corpus).
    """
    if count < 0:
        raise DataError(f"count must be >= 0, got {count}")
    if count == 0:
        return []
    if test_corpus.n_pairs == 0:
        raise DataError("test corpus is empty")
    if int(np.count_nonzero(noun_dist.probs > 0.0)) < 2:
        raise DataError("confounder distribution needs at least 2 support nouns")
    if require_unseen and training_corpus is None:
        raise DataError("require_unseen needs a training corpus")

    pair_cum = np.cumsum(test_corpus.counts)
    pair_cum /= pair_cum[-1]
    items = []
    for _ in range(count):
        pos = int(np.searchsorted(pair_cum, rng.random(), side="right"))
        pos = min(pos, test_corpus.n_pairs - 1)
        verb = test_corpus.verb_vocab[test_corpus.verb_ids[pos]]
        noun = test_corpus.noun_vocab[test_corpus.noun_ids[pos]]
        for _attempt in range(REDRAW_ATTEMPTS):
            confounder = sample_noun(noun_dist, rng)
            if confounder == noun:
                continue
            if require_unseen and training_corpus.count(verb, confounder) > 0.0:
                continue
            break
        else:
            raise DataError(
                f"could not draw a confounder for ({verb}, {noun!r}) in {REDRAW_ATTEMPTS} attempts"
            )
        items.append(PseudoItem(verb=verb, noun=noun, confounder=confounder))
    return items


def _finalize(
    method: str,
    items: int,
    correct: int,
    incorrect: int,
    abstain: int,
    ambiguity: float,
    seed: int,
) -> EvalReport:
    nan = float("nan")
    decided = correct + incorrect
    precision = correct / decided if decided > 0 else nan
    effectiveness = correct / items if items > 0 else nan
    std_p = std_e = nan
    if ambiguity > 1.0:
        if math.isfinite(precision):
            std_p = standardize(precision, ambiguity)
        if math.isfinite(effectiveness):
            std_e = standardize(effectiveness, ambiguity)
    return EvalReport(
        method=method,
        items=items,
        correct=correct,
        incorrect=incorrect,
        abstain=abstain,
        ambiguity=ambiguity,
        precision=precision,
        effectiveness=effectiveness,
        std_precision=std_p,
        std_effectiveness=std_e,
        seed=seed,
    )


def _tally(choice: Choice, gold: str, counts: dict, trace, item_id: str) -> None:
    if not choice.chosen:
        counts["abstain"] += 1
        outcome = "abstain"
    elif choice.noun == gold:
        counts["correct"] += 1
        outcome = "correct"
    else:
        counts["incorrect"] += 1
        outcome = "incorrect"
    if trace is not None:
        cls = "-" if choice.class_index is None else str(choice.class_index)
        noun = choice.noun if choice.noun is not None else "ABSTAIN"
        trace.append(f"{item_id}\t{noun}\t{cls}\t{format(choice.score, '.6g')}\t{outcome}")


def eval_pseudo(selector, items: list[PseudoItem], seed: int = 0, trace=None) -> EvalReport:
    """Run a selector over pseudo triples; correct means it picked the observed noun."""
    counts = {"correct": 0, "incorrect": 0, "abstain": 0}
    method = "none"
    for index, item in enumerate(items):
        choice = selector(item.verb, [item.noun, item.confounder])
        method = choice.method.value
        _tally(choice, item.noun, counts, trace, str(index))
    ambiguity = 2.0 if items else float("nan")
    return _finalize(method, len(items), counts["correct"], counts["incorrect"], counts["abstain"], ambiguity, seed)


def eval_bilingual(selector, items: list[BilingualTestItem], seed: int = 0, trace=None) -> EvalReport:
    """Run a selector over bilingual items; correct means it picked the gold target."""
    counts = {"correct": 0, "incorrect": 0, "abstain": 0}
    method = "none"
    for item in items:
        choice = selector(item.verb, list(item.candidates))
        method = choice.method.value
        _tally(choice, item.gold_target, counts, trace, item.item_id)
    ambiguity = mean_ambiguity(items) if items else float("nan")
    return _finalize(method, len(items), counts["correct"], counts["incorrect"], counts["abstain"], ambiguity, seed)


def make_selector(
    method: str,
    lexicon=None,
    model=None,
    corpus=None,
    rng: np.random.Generator | None = None,
    pooled_items=None,
    rel_tol: float = 1e-6,
    max_iters: int = 200,
):
    """Bind a selection method to its resources as a (verb, candidates) callable.

    With pooled_items (an iterable of objects with .verb and .candidates),
    the lexicon method boosts and fits on the union of the candidate sets
    seen for each verb instead of refitting per decision.
    """
    from . import disambig

    if method == "problex":
        if lexicon is None:
            raise DataError("problex needs a lexicon")
        pools = None
        if pooled_items is not None:
            pools = {}
            for item in pooled_items:
                pools.setdefault(item.verb, set()).update(_item_candidates(item))
        cache: dict = {}

        def select(verb, candidates):
            pool = pools.get(verb) if pools is not None else None
            return disambig.problex_select(
                lexicon, verb, candidates,
                rel_tol=rel_tol, max_iters=max_iters,
                pool=pool, weight_cache=cache,
            )

        return select
    if method == "problex_footnote":
        if model is None or corpus is None:
            raise DataError("problex_footnote needs a model and a training corpus")
        return lambda verb, candidates: disambig.footnote_select(model, corpus, verb, candidates)
    if method == "clustering":
        if model is None:
            raise DataError("clustering needs a model")
        return lambda verb, candidates: disambig.clustering_select(model, verb, candidates)
    if method == "empirical":
        if corpus is None:
            raise DataError("empirical needs a training corpus")
        return lambda verb, candidates: disambig.empirical_select(corpus, verb, candidates)
    if method == "major_sense":
        if corpus is None:
            raise DataError("major_sense needs a training corpus")
        return lambda verb, candidates: disambig.major_sense_select(corpus, candidates)
    if method == "random":
        if rng is None:
            raise DataError("random needs a seeded generator")
        return lambda verb, candidates: disambig.random_select(candidates, rng)
    raise DataError(f"unknown method {method!r}")


def _item_candidates(item):
    if isinstance(item, PseudoItem):
        return (item.noun, item.confounder)
    return item.candidates
