"""Latent-class model over verb-noun pairs, trained by EM.

The model factors the joint probability of a class, a verb slot and a noun
as prior(c) * p(v|c) * p(n|c): verb and noun are conditionally independent
given the class, so all association between them flows through the classes.
Marginalizing the class yields a semantically smoothed pair probability.

Training maximizes the count-weighted log-likelihood of the observed pairs
with the standard EM updates for this factorization: the E step computes
class posteriors per observed pair, the M step re-normalizes the
posterior-weighted counts into new priors and emission rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .corpus import PairCorpus, VerbSlot
from .errors import DataError, NotFoundError, NumericalError, ParseError
from ._textio import data_lines, fmt17, write_text
from .rng import substream

log = logging.getLogger(__name__)

MODEL_MAGIC = "PLEX-MODEL 1"

# Relative spread of the seeded init perturbation around uniform rows.
INIT_JITTER = 0.1


@dataclass(eq=False)
class LCModel:
    """Class priors plus per-class verb and noun emission distributions.

    priors has shape (K,); verb_emis and noun_emis have one row per class
    over the verb and noun vocabularies of the training corpus. Rows and
    priors each sum to 1. Immutable by convention; training returns new
    instances.
    """

    priors: np.ndarray
    verb_emis: np.ndarray
    noun_emis: np.ndarray
    verb_vocab: tuple[VerbSlot, ...]
    noun_vocab: tuple[str, ...]
    verb_index: dict[VerbSlot, int] = field(repr=False)
    noun_index: dict[str, int] = field(repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.priors)


@dataclass
class TrainConfig:
    """EM training knobs; rel_tol = 0 disables the convergence test."""

    n_classes: int
    seed: int = 0
    max_iters: int = 200
    rel_tol: float = 1e-6
    floor: float = 0.0

    def __post_init__(self):
        if self.n_classes < 1:
            raise DataError(f"n_classes must be >= 1, got {self.n_classes}")
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_tol < 0 or self.floor < 0:
            raise DataError("rel_tol and floor must be non-negative")


@dataclass
class TrainTrace:
    """Per-iteration log-likelihoods and the termination outcome."""

    log_likelihoods: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    over_parameterized: bool = False


def init_model(corpus: PairCorpus, config: TrainConfig) -> LCModel:
    """Seeded starting point: uniform priors, jittered-uniform emission rows.

    Each emission entry is uniform times (1 + INIT_JITTER * u) with u drawn
    uniformly from [0, 1), then the row is renormalized. The jitter breaks
    class symmetry; the seed makes the result reproducible bit for bit.
    Verb rows are drawn before noun rows.
    """
    if corpus.n_pairs == 0:
        raise DataError("cannot initialize a model on an empty corpus")
    k = config.n_classes
    n_verbs = len(corpus.verb_vocab)
    n_nouns = len(corpus.noun_vocab)
    if k > n_verbs * n_nouns:
        log.warning("over-parameterized: %d classes for %d observable cells", k, n_verbs * n_nouns)
    rng = substream(config.seed, "init")

    def jittered_rows(n_cols: int) -> np.ndarray:
        rows = (1.0 / n_cols) * (1.0 + INIT_JITTER * rng.random((k, n_cols)))
        return rows / rows.sum(axis=1, keepdims=True)

    return LCModel(
        priors=np.full(k, 1.0 / k),
        verb_emis=jittered_rows(n_verbs),
        noun_emis=jittered_rows(n_nouns),
        verb_vocab=corpus.verb_vocab,
        noun_vocab=corpus.noun_vocab,
        verb_index=dict(corpus.verb_index),
        noun_index=dict(corpus.noun_index),
    )


def _require_ids(model: LCModel, verb: VerbSlot, noun: str) -> tuple[int, int]:
    vi = model.verb_index.get(verb)
    if vi is None:
        raise NotFoundError(f"verb slot {verb} not in model vocabulary")
    ni = model.noun_index.get(noun)
    if ni is None:
        raise NotFoundError(f"noun {noun!r} not in model vocabulary")
    return vi, ni


def joint(model: LCModel, verb: VerbSlot, noun: str) -> float:
    """Class-smoothed pair probability: sum_c prior(c) p(v|c) p(n|c).

    Uses exactly rounded summation, so relabeling classes cannot change
    the value.
    """
    vi, ni = _require_ids(model, verb, noun)
    terms = model.priors * model.verb_emis[:, vi] * model.noun_emis[:, ni]
    return math.fsum(terms)


def posterior(model: LCModel, verb: VerbSlot, noun: str) -> np.ndarray:
    """Class distribution given an observed pair; errors if the pair has zero mass."""
    vi, ni = _require_ids(model, verb, noun)
    terms = model.priors * model.verb_emis[:, vi] * model.noun_emis[:, ni]
    total = math.fsum(terms)
    if total <= 0.0:
        raise NumericalError(f"posterior undefined: pair ({verb}, {noun!r}) has zero probability")
    return terms / total


def _shares_vocab(model: LCModel, corpus: PairCorpus) -> bool:
    return (
        corpus.verb_vocab is model.verb_vocab or corpus.verb_vocab == model.verb_vocab
    ) and (corpus.noun_vocab is model.noun_vocab or corpus.noun_vocab == model.noun_vocab)


def log_likelihood(model: LCModel, corpus: PairCorpus) -> float:
    """Count-weighted log-likelihood of the corpus under the model.

    The corpus need not share the model's vocabulary; pairs the model
    cannot represent have zero probability. Any zero-probability pair
    makes the result -inf, with a logged diagnostic naming offenders.
    """
    if _shares_vocab(model, corpus):
        vids, nids = corpus.verb_ids, corpus.noun_ids
        zero_ids = np.zeros(corpus.n_pairs, dtype=bool)
    else:
        vmap = np.array([model.verb_index.get(v, -1) for v in corpus.verb_vocab], dtype=np.int64)
        nmap = np.array([model.noun_index.get(n, -1) for n in corpus.noun_vocab], dtype=np.int64)
        vids = vmap[corpus.verb_ids]
        nids = nmap[corpus.noun_ids]
        zero_ids = (vids < 0) | (nids < 0)
        vids = np.where(zero_ids, 0, vids)
        nids = np.where(zero_ids, 0, nids)
    prod = model.priors[:, None] * model.verb_emis[:, vids] * model.noun_emis[:, nids]
    pair_probs = prod.sum(axis=0)
    pair_probs[zero_ids] = 0.0
    zero = np.flatnonzero(pair_probs <= 0.0)
    if zero.size:
        shown = ", ".join(
            f"({corpus.verb_vocab[corpus.verb_ids[i]]}, {corpus.noun_vocab[corpus.noun_ids[i]]!r})"
            for i in zero[:5]
        )
        log.warning("log-likelihood is -inf: %d zero-probability pairs, first: %s", zero.size, shown)
        return float("-inf")
    return float(corpus.counts @ np.log(pair_probs))


def _normalize_rows(acc: np.ndarray, floor: float) -> np.ndarray:
    if floor > 0.0:
        acc = acc + floor
    sums = acc.sum(axis=1, keepdims=True)
    dead = sums[:, 0] <= 0.0
    if dead.any():
        # a class with zero posterior mass keeps a uniform row; its prior is 0
        acc = acc.copy()
        acc[dead] = 1.0
        sums = acc.sum(axis=1, keepdims=True)
    return acc / sums


def em_step(model: LCModel, corpus: PairCorpus, floor: float = 0.0) -> tuple[LCModel, float]:
    """One EM update; returns the new model and the log-likelihood of the INPUT model."""
    if not _shares_vocab(model, corpus):
        raise DataError("em_step requires the model and corpus to share vocabularies")
    prior_acc, verb_acc, noun_acc, loglik, bad = _kernels.em_pair_stats(
        corpus.verb_ids, corpus.noun_ids, corpus.counts,
        model.priors, model.verb_emis, model.noun_emis,
    )
    if bad >= 0:
        verb = corpus.verb_vocab[corpus.verb_ids[bad]]
        noun = corpus.noun_vocab[corpus.noun_ids[bad]]
        raise NumericalError(
            f"EM step failed: observed pair ({verb}, {noun!r}) has zero probability "
            "(use a positive init or a positive emission floor)"
        )
    new_model = LCModel(
        priors=prior_acc / prior_acc.sum(),
        verb_emis=_normalize_rows(verb_acc, floor),
        noun_emis=_normalize_rows(noun_acc, floor),
        verb_vocab=model.verb_vocab,
        noun_vocab=model.noun_vocab,
        verb_index=model.verb_index,
        noun_index=model.noun_index,
    )
    return new_model, float(loglik)


def train(corpus: PairCorpus, config: TrainConfig) -> tuple[LCModel, TrainTrace]:
    """Run EM from a seeded init until the relative improvement drops below rel_tol.

    The trace records the log-likelihood of the model entering each
    iteration. Convergence means the relative improvement fell below
    rel_tol or an update was an exact fixed point (as a single class is
    after one step); rel_tol = 0 disables both tests, so the loop always
    runs max_iters iterations. Identical (corpus, config) pairs produce
    bit-identical models.
    """
    model = init_model(corpus, config)
    trace = TrainTrace(
        over_parameterized=config.n_classes > len(corpus.verb_vocab) * len(corpus.noun_vocab)
    )
    prev = None
    for _ in range(config.max_iters):
        stepped, loglik = em_step(model, corpus, floor=config.floor)
        trace.log_likelihoods.append(loglik)
        if config.rel_tol > 0.0:
            improved = prev is None or (loglik - prev) >= config.rel_tol * abs(prev)
            fixed_point = (
                np.array_equal(stepped.priors, model.priors)
                and np.array_equal(stepped.verb_emis, model.verb_emis)
                and np.array_equal(stepped.noun_emis, model.noun_emis)
            )
            if not improved or fixed_point:
                trace.converged = True
                model = stepped
                break
        prev = loglik
        model = stepped
    trace.iterations = len(trace.log_likelihoods)
    return model, trace


def save_model(model: LCModel, path, comments: tuple[str, ...] = ()) -> None:
    """Write the PLEX-MODEL text format (17 significant digits per value)."""
    lines = [MODEL_MAGIC]
    lines.extend(f"# {c}" for c in comments)
    lines.append(f"K {model.n_classes}")
    lines.append("PRIORS")
    lines.extend(f"{c} {fmt17(p)}" for c, p in enumerate(model.priors))
    lines.append("VERBS")
    for vi, verb in enumerate(model.verb_vocab):
        lines.append(f"{verb} " + " ".join(fmt17(x) for x in model.verb_emis[:, vi]))
    lines.append("NOUNS")
    for ni, noun in enumerate(model.noun_vocab):
        lines.append(f"{noun} " + " ".join(fmt17(x) for x in model.noun_emis[:, ni]))
    write_text(path, lines)


def load_model(path) -> LCModel:
    """Read a PLEX-MODEL file back; exact inverse of save_model."""
    lines = list(data_lines(path))
    pos = 0

    def take() -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            raise ParseError(path, lines[-1][0] if lines else 0, "unexpected end of model file")
        item = lines[pos]
        pos += 1
        return item

    line_no, magic = take()
    if magic != MODEL_MAGIC:
        raise ParseError(path, line_no, f"bad header {magic!r}, expected {MODEL_MAGIC!r}")
    line_no, k_line = take()
    if not k_line.startswith("K "):
        raise ParseError(path, line_no, "expected 'K <int>'")
    try:
        k = int(k_line[2:])
    except ValueError:
        raise ParseError(path, line_no, "expected 'K <int>'") from None
    if k < 1:
        raise ParseError(path, line_no, f"K must be >= 1, got {k}")

    line_no, section = take()
    if section != "PRIORS":
        raise ParseError(path, line_no, "expected PRIORS section")
    priors = np.empty(k)
    for c in range(k):
        line_no, line = take()
        fields = line.split(" ")
        if len(fields) != 2 or fields[0] != str(c):
            raise ParseError(path, line_no, f"expected '{c} <prob>'")
        priors[c] = float(fields[1])

    def read_emissions(name: str, parse_token):
        line_no, section = take()
        if section != name:
            raise ParseError(path, line_no, f"expected {name} section")
        tokens = []
        columns = []
        while pos < len(lines) and not (name == "VERBS" and lines[pos][1] == "NOUNS"):
            line_no, line = take()
            fields = line.split(" ")
            if len(fields) != k + 1:
                raise ParseError(path, line_no, f"expected token plus {k} probabilities")
            tokens.append(parse_token(fields[0], line_no))
            columns.append([float(x) for x in fields[1:]])
        if not tokens:
            raise ParseError(path, line_no, f"empty {name} section")
        return tokens, np.asarray(columns).T.copy()  # (K, |vocab|), C-contiguous

    def parse_verb(text: str, line_no: int) -> VerbSlot:
        try:
            return VerbSlot.parse(text)
        except DataError as exc:
            raise ParseError(path, line_no, str(exc)) from None

    verbs, verb_emis = read_emissions("VERBS", parse_verb)
    nouns, noun_emis = read_emissions("NOUNS", lambda t, _ln: t)

    model = LCModel(
        priors=priors,
        verb_emis=verb_emis,
        noun_emis=noun_emis,
        verb_vocab=tuple(verbs),
        noun_vocab=tuple(nouns),
        verb_index={v: i for i, v in enumerate(verbs)},
        noun_index={n: i for i, n in enumerate(nouns)},
    )
    for name, arr in (("priors", priors[None, :]), ("verb", verb_emis), ("noun", noun_emis)):
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9) or np.any(arr < 0):
            raise DataError(f"{path}: {name} rows do not form distributions")
    return model
