"""Target-noun selection among candidate translations.

The lexicon lookup (problex_select) augments the verb slot's observed noun
sample with each candidate counted once, re-fits the class weights on that
combined sample, and picks the candidate-class pair with the highest
estimated class frequency f_c(n) = f(n) p(c|n). The +1 boost is what lets
the lookup choose among candidates never seen with the verb.

The remaining selectors are the comparison baselines: a posterior-scored
shortcut that skips the extra EM fit, the class-smoothed pair probability,
the raw empirical pair counts, the corpus-wide majority noun, and a seeded
uniform pick. Every scoring selector abstains instead of guessing when its
signal is identically zero, and breaks ties by noun vocabulary order, so
results do not depend on candidate order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .corpus import NounSample, PairCorpus, VerbSlot
from .errors import NotFoundError, UsageError
from .lexicon import DEFAULT_MAX_ITERS, DEFAULT_REL_TOL, Lexicon, fit_class_weights
from .model import LCModel

TIE_REL_TOL = 1e-12


class Method(Enum):
    PROBLEX = "problex"
    PROBLEX_FOOTNOTE = "problex_footnote"
    CLUSTERING = "clustering"
    EMPIRICAL = "empirical"
    MAJOR_SENSE = "major_sense"
    RANDOM = "random"


class Status(Enum):
    CHOSEN = "chosen"
    ABSTAIN = "abstain"


@dataclass
class Choice:
    """Outcome of one selection call."""

    status: Status
    method: Method
    noun: str | None = None
    class_index: int | None = None
    score: float = 0.0
    tie: bool = False
    reason: str | None = None

    @property
    def chosen(self) -> bool:
        return self.status is Status.CHOSEN


def _abstain(method: Method, reason: str, tie: bool = False) -> Choice:
    return Choice(status=Status.ABSTAIN, method=method, tie=tie, reason=reason)


def _require_candidates(candidates) -> list[str]:
    candidates = list(candidates)
    if not candidates:
        raise UsageError("candidate list must not be empty")
    return candidates


def _pick(scored: list[tuple[int, str, int | None, float]], method: Method) -> Choice:
    """Argmax over (vocab_idx, noun, class, score) rows with positive scores.

    Scores within TIE_REL_TOL of the maximum (relatively) tie; the noun
    with the lowest vocabulary index wins and the tie is flagged.
    """
    best = max(score for _vi, _n, _c, score in scored)
    ties = [row for row in scored if best - row[3] <= TIE_REL_TOL * best]
    ties.sort(key=lambda row: row[0])
    vocab_idx, noun, class_index, score = ties[0]
    return Choice(
        status=Status.CHOSEN,
        method=method,
        noun=noun,
        class_index=class_index,
        score=score,
        tie=len(ties) > 1,
    )


def build_combined_sample(base: NounSample, candidates, model: LCModel) -> NounSample:
    """Observed sample plus one count per distinct candidate.

    The combined noun order is canonical (sample order, then new candidates
    by model vocabulary index, then the rest lexicographically), so the
    fitted weights cannot depend on candidate list order.
    """
    freqs = dict(base.freqs)
    extra = sorted(
        set(candidates) - freqs.keys(),
        key=lambda n: (0, model.noun_index[n]) if n in model.noun_index else (1, n),
    )
    boost = set(candidates)
    for noun in freqs:
        if noun in boost:
            freqs[noun] += 1.0
    for noun in extra:
        freqs[noun] = 1.0
    return NounSample(verb=base.verb, freqs=freqs, size=math.fsum(freqs.values()))


def problex_select(
    lexicon: Lexicon,
    verb: VerbSlot,
    candidates,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    pool=None,
    weight_cache: dict | None = None,
) -> Choice:
    """Pick the candidate-class pair with maximal estimated class frequency.

    Class weights are re-fitted per decision on the combined sample. With
    ``pool`` the combined sample instead uses that candidate set (pooled
    across the test items of one verb); ``weight_cache`` memoizes fits
    keyed by (verb, boosted set).
    """
    candidates = _require_candidates(candidates)
    entry = lexicon.entries.get(verb)
    if entry is None:
        return _abstain(Method.PROBLEX, f"no lexicon entry for {verb}")
    model = lexicon.model

    boost = candidates if pool is None else list(pool)
    cache_key = (verb, frozenset(boost))
    weights = weight_cache.get(cache_key) if weight_cache is not None else None
    combined = build_combined_sample(entry.sample, boost, model)
    if weights is None:
        weights = fit_class_weights(model, combined, rel_tol, max_iters)
        if weight_cache is not None:
            weight_cache[cache_key] = weights

    scored = []
    for noun in sorted(set(candidates) & model.noun_index.keys(), key=model.noun_index.get):
        ni = model.noun_index[noun]
        terms = weights * model.noun_emis[:, ni]
        total = math.fsum(terms)
        if total <= 0.0:
            continue
        class_index = int(np.argmax(terms))
        score = combined.freqs.get(noun, 0.0) * float(terms[class_index]) / total
        if score > 0.0:
            scored.append((ni, noun, class_index, score))
    if not scored:
        return _abstain(Method.PROBLEX, "no candidate is scorable by the model")
    return _pick(scored, Method.PROBLEX)


def footnote_select(model: LCModel, corpus: PairCorpus, verb: VerbSlot, candidates) -> Choice:
    """Shortcut scorer: (pair count + 1) times the maximal class posterior.

    Skips the per-decision EM fit; candidates whose posterior is undefined
    (zero pair probability or out of vocabulary) are unscorable.
    """
    candidates = _require_candidates(candidates)
    vi = model.verb_index.get(verb)
    if vi is None:
        raise NotFoundError(f"verb slot {verb} not in model vocabulary")
    scored = []
    for noun in sorted(set(candidates) & model.noun_index.keys(), key=model.noun_index.get):
        ni = model.noun_index[noun]
        terms = model.priors * model.verb_emis[:, vi] * model.noun_emis[:, ni]
        total = math.fsum(terms)
        if total <= 0.0:
            continue
        class_index = int(np.argmax(terms))
        score = (corpus.count(verb, noun) + 1.0) * float(terms[class_index]) / total
        scored.append((ni, noun, class_index, score))
    if not scored:
        return _abstain(Method.PROBLEX_FOOTNOTE, "posterior undefined for every candidate")
    return _pick(scored, Method.PROBLEX_FOOTNOTE)


def clustering_select(model: LCModel, verb: VerbSlot, candidates) -> Choice:
    """Argmax of the class-smoothed pair probability."""
    candidates = _require_candidates(candidates)
    vi = model.verb_index.get(verb)
    if vi is None:
        return _abstain(Method.CLUSTERING, f"verb slot {verb} not in model vocabulary")
    scored = []
    for noun in sorted(set(candidates) & model.noun_index.keys(), key=model.noun_index.get):
        ni = model.noun_index[noun]
        score = math.fsum(model.priors * model.verb_emis[:, vi] * model.noun_emis[:, ni])
        if score > 0.0:
            scored.append((ni, noun, None, score))
    if not scored:
        return _abstain(Method.CLUSTERING, "every candidate has zero smoothed probability")
    return _pick(scored, Method.CLUSTERING)


def empirical_select(corpus: PairCorpus, verb: VerbSlot, candidates) -> Choice:
    """Argmax of the raw training count; abstains on all-zero or tied maxima.

    The tie abstention is what produces this baseline's don't-know cases:
    unsmoothed counts often give several candidates the same (or no)
    support.
    """
    candidates = _require_candidates(candidates)
    scored = []
    for noun in sorted(set(candidates)):
        count = corpus.count(verb, noun)
        if count > 0.0:
            ni = corpus.noun_index[noun]
            scored.append((ni, noun, None, count))
    if not scored:
        return _abstain(Method.EMPIRICAL, "no candidate was seen with this verb")
    best = max(score for *_rest, score in scored)
    ties = [row for row in scored if best - row[3] <= TIE_REL_TOL * best]
    if len(ties) > 1:
        return _abstain(Method.EMPIRICAL, "tied maximal counts", tie=True)
    vocab_idx, noun, _cls, score = ties[0]
    return Choice(status=Status.CHOSEN, method=Method.EMPIRICAL, noun=noun, score=score)


def major_sense_select(corpus: PairCorpus, candidates) -> Choice:
    """Argmax of the corpus-wide marginal noun frequency (verb ignored)."""
    candidates = _require_candidates(candidates)
    totals = corpus.noun_totals()
    scored = []
    for noun in sorted(set(candidates)):
        ni = corpus.noun_index.get(noun)
        if ni is not None and totals[ni] > 0.0:
            scored.append((ni, noun, None, float(totals[ni])))
    if not scored:
        return _abstain(Method.MAJOR_SENSE, "no candidate occurs in the corpus")
    return _pick(scored, Method.MAJOR_SENSE)


def random_select(candidates, rng: np.random.Generator) -> Choice:
    """Uniform seeded pick; the score is the uniform probability."""
    candidates = _require_candidates(candidates)
    noun = candidates[int(rng.integers(len(candidates)))]
    return Choice(
        status=Status.CHOSEN,
        method=Method.RANDOM,
        noun=noun,
        score=1.0 / len(candidates),
    )
