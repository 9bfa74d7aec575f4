"""Probabilistic class-based lexicon: per-verb-slot class weights.

For one verb slot with an observed noun sample, a second, restricted EM
re-estimates only the class weights against the mixture

    p(n) = sum_c weight(c) * p(n|c)

holding the model's noun emissions fixed. The fitted weights turn a noun's
sample frequency f(n) into per-class estimated frequencies

    f_c(n) = f(n) * p(c|n),  p(c|n) = weight(c) p(n|c) / p(n)

which are what the disambiguation lookup maximizes. Entries cache the
weight-argmax class because per-decision argmax classes usually, but not
always, agree with it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .corpus import NounSample, PairCorpus, VerbSlot, object_sample
from .errors import DataError, NotFoundError, NumericalError, ParseError
from .model import LCModel
from ._textio import data_lines, fmt17, sha256_file, write_text

log = logging.getLogger(__name__)

LEXICON_MAGIC = "PLEX-LEX 1"

DEFAULT_REL_TOL = 1e-6
DEFAULT_MAX_ITERS = 200


@dataclass(eq=False)
class LexiconEntry:
    """Fitted class weights for one verb slot, plus its noun sample."""

    verb: VerbSlot
    class_weights: np.ndarray
    sample: NounSample
    top_class: int
    top_class_prob: float


@dataclass(eq=False)
class Lexicon:
    """Lexicon entries keyed by verb slot, bound to the model that scores them."""

    model: LCModel
    entries: dict[VerbSlot, LexiconEntry] = field(default_factory=dict)
    model_path: str | None = None
    model_hash: str | None = None


def _effective_sample(model: LCModel, sample: NounSample):
    """Restrict a sample to nouns the model can score; warn about the rest."""
    noun_ids = []
    freqs = []
    dropped = []
    for noun, freq in sample.freqs.items():
        ni = model.noun_index.get(noun)
        if ni is None or not model.noun_emis[:, ni].any():
            dropped.append(noun)
            continue
        noun_ids.append(ni)
        freqs.append(freq)
    if dropped:
        log.warning(
            "%s: dropped %d sample noun(s) the model cannot score: %s",
            sample.verb, len(dropped), ", ".join(dropped[:8]),
        )
    if not noun_ids:
        raise DataError(f"no usable sample nouns for {sample.verb}")
    noun_probs = np.ascontiguousarray(model.noun_emis[:, noun_ids].T)  # (S, K)
    return noun_probs, np.asarray(freqs, dtype=np.float64)


def _fit_weights(
    model: LCModel,
    sample: NounSample,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
):
    noun_probs, freqs = _effective_sample(model, sample)
    weights, trace, _iters, converged, bad = _kernels.mixture_weight_em(
        noun_probs, freqs, model.priors.copy(), float(rel_tol), int(max_iters)
    )
    if bad >= 0:
        raise NumericalError(
            f"class-weight fit failed for {sample.verb}: a sample noun has zero mixture probability"
        )
    return weights, trace, converged


def fit_class_weights(
    model: LCModel,
    sample: NounSample,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> np.ndarray:
    """EM over class weights only, initialized at the model priors.

    Sample nouns outside the model vocabulary (or with zero emission in
    every class) are dropped with a warning; an empty effective sample is
    an error. The model's emissions are never modified.
    """
    weights, _trace, _converged = _fit_weights(model, sample, rel_tol, max_iters)
    return weights


def membership(entry: LexiconEntry, model: LCModel, noun: str) -> np.ndarray:
    """Class membership p(c|n) of a noun under the entry's fitted weights."""
    ni = model.noun_index.get(noun)
    if ni is None:
        raise NotFoundError(f"noun {noun!r} not in model vocabulary")
    terms = entry.class_weights * model.noun_emis[:, ni]
    total = math.fsum(terms)
    if total <= 0.0:
        raise NumericalError(f"membership undefined for {noun!r} under entry {entry.verb}")
    return terms / total


def estimated_frequency(
    entry: LexiconEntry,
    model: LCModel,
    class_index: int,
    noun: str,
    freq_override: float | None = None,
) -> float:
    """Estimated class frequency f_c(n) = f(n) * p(c|n).

    f(n) is the entry's sample frequency (0 for nouns outside the sample)
    unless an override is supplied, as with combined candidate samples.
    """
    weights = membership(entry, model, noun)
    freq = entry.sample.freqs.get(noun, 0.0) if freq_override is None else float(freq_override)
    return freq * float(weights[class_index])


def build_entry(
    model: LCModel,
    corpus: PairCorpus,
    verb: VerbSlot,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> LexiconEntry:
    """Fit an entry for one verb slot from its object sample in the corpus."""
    sample = object_sample(corpus, verb)
    weights = fit_class_weights(model, sample, rel_tol, max_iters)
    top = int(np.argmax(weights))
    return LexiconEntry(
        verb=verb,
        class_weights=weights,
        sample=sample,
        top_class=top,
        top_class_prob=float(weights[top]),
    )


def top_nouns(entry: LexiconEntry, model: LCModel, class_index: int, k: int = 10):
    """Sample nouns ranked by f_c(n) descending, ties broken by vocab order.

    Nouns the model cannot score are skipped (they were already warned
    about when the entry was fitted).
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    ranked = []
    for noun, freq in entry.sample.freqs.items():
        ni = model.noun_index.get(noun)
        if ni is None:
            continue
        terms = entry.class_weights * model.noun_emis[:, ni]
        total = math.fsum(terms)
        if total <= 0.0:
            continue
        ranked.append((noun, freq * float(terms[class_index]) / total, ni))
    ranked.sort(key=lambda item: (-item[1], item[2]))
    return [(noun, score) for noun, score, _ni in ranked[:k]]


def build_lexicon(
    model: LCModel,
    corpus: PairCorpus,
    min_size: float = 1.0,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Lexicon:
    """Fit entries for every corpus verb slot whose sample size reaches min_size.

    Verb slots whose entire sample is unscorable are skipped with a warning
    rather than failing the build.
    """
    lexicon = Lexicon(model=model)
    for verb in corpus.verb_vocab:
        sample = object_sample(corpus, verb)
        if sample.size < min_size:
            continue
        try:
            lexicon.entries[verb] = build_entry(model, corpus, verb, rel_tol, max_iters)
        except DataError as exc:
            log.warning("skipping %s: %s", verb, exc)
    return lexicon


def save_lexicon(lexicon: Lexicon, path, model_path, comments: tuple[str, ...] = ()) -> None:
    """Write the PLEX-LEX text format, recording the model path and hash."""
    lines = [LEXICON_MAGIC]
    lines.extend(f"# {c}" for c in comments)
    lines.append(f"model {model_path}")
    lines.append(f"hash {sha256_file(model_path)}")
    for verb, entry in lexicon.entries.items():
        lines.append(f"entry {verb} {fmt17(entry.sample.size)}")
        lines.extend(f"w {c} {fmt17(p)}" for c, p in enumerate(entry.class_weights))
        lines.extend(f"n {noun} {fmt17(freq)}" for noun, freq in entry.sample.freqs.items())
    write_text(path, lines)


def load_lexicon(path, model: LCModel | None = None, model_path=None) -> Lexicon:
    """Read a PLEX-LEX file; loads its recorded model unless one is supplied.

    The recorded content hash must match the model file that is actually
    used, so a lexicon can never be silently paired with a retrained model.
    """
    from .model import load_model

    lines = list(data_lines(path))
    if not lines or lines[0][1] != LEXICON_MAGIC:
        raise ParseError(path, lines[0][0] if lines else 0, f"expected {LEXICON_MAGIC!r} header")
    if len(lines) < 3 or not lines[1][1].startswith("model ") or not lines[2][1].startswith("hash "):
        raise ParseError(path, lines[0][0], "expected 'model <path>' and 'hash <sha256>' lines")
    recorded_path = lines[1][1][len("model "):]
    recorded_hash = lines[2][1][len("hash "):]

    if model is None:
        candidate = model_path if model_path is not None else recorded_path
        actual_hash = sha256_file(candidate)
        if actual_hash != recorded_hash:
            raise DataError(
                f"{path}: model file {candidate} hash {actual_hash[:12]}... does not match "
                f"recorded {recorded_hash[:12]}..."
            )
        model = load_model(candidate)

    lexicon = Lexicon(model=model, model_path=recorded_path, model_hash=recorded_hash)
    k = model.n_classes
    pos = 3
    while pos < len(lines):
        line_no, line = lines[pos]
        fields = line.split(" ")
        if len(fields) != 3 or fields[0] != "entry":
            raise ParseError(path, line_no, f"expected 'entry <verb.slot> <size>', got {line!r}")
        try:
            verb = VerbSlot.parse(fields[1])
        except DataError as exc:
            raise ParseError(path, line_no, str(exc)) from None
        size = float(fields[2])
        pos += 1

        weights = np.empty(k)
        for c in range(k):
            if pos >= len(lines):
                raise ParseError(path, line_no, f"truncated weights for entry {verb}")
            w_no, w_line = lines[pos]
            w_fields = w_line.split(" ")
            if len(w_fields) != 3 or w_fields[0] != "w" or w_fields[1] != str(c):
                raise ParseError(path, w_no, f"expected 'w {c} <prob>', got {w_line!r}")
            weights[c] = float(w_fields[2])
            pos += 1

        freqs: dict[str, float] = {}
        while pos < len(lines) and lines[pos][1].startswith("n "):
            n_no, n_line = lines[pos]
            n_fields = n_line.split(" ")
            if len(n_fields) != 3:
                raise ParseError(path, n_no, f"expected 'n <noun> <freq>', got {n_line!r}")
            freqs[n_fields[1]] = float(n_fields[2])
            pos += 1
        if not freqs:
            raise ParseError(path, line_no, f"entry {verb} has no sample nouns")

        top = int(np.argmax(weights))
        lexicon.entries[verb] = LexiconEntry(
            verb=verb,
            class_weights=weights,
            sample=NounSample(verb=verb, freqs=freqs, size=size),
            top_class=top,
            top_class_prob=float(weights[top]),
        )
    return lexicon
