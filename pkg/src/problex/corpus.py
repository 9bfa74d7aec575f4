"""Verb-noun pair corpora, dictionaries, and bilingual test sets.

File formats (UTF-8, LF line endings, tab-separated fields, lines starting
with '#' are comments):

  pairs      verb.slot <TAB> noun <TAB> count
  dictionary source <TAB> target1,target2,...
  bilingual  id <TAB> verb.slot <TAB> source_noun <TAB> gold <TAB> cand1,cand2,...

Verb slots are lemmas qualified by a subcategorization-frame position:
``.as:s`` (intransitive subject), ``.aso:s`` (transitive subject) or
``.aso:o`` (transitive object), e.g. ``cross.aso:o``.

Counts are non-negative reals: integer observation counts and fractional
estimated frequencies share the same table shapes. Duplicate pair lines
are summed. Vocabularies keep first-appearance order, which makes all
downstream tie-breaking deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import DataError, NotFoundError, ParseError
from ._textio import data_lines, fmt17, write_text


class FrameSlot(Enum):
    """Subcategorization-frame position qualifying a verb lemma."""

    INTRANS_SUBJ = "as:s"
    TRANS_SUBJ = "aso:s"
    TRANS_OBJ = "aso:o"


_SLOT_BY_SUFFIX = {slot.value: slot for slot in FrameSlot}


@dataclass(frozen=True)
class VerbSlot:
    """A verb lemma in a specific frame slot, e.g. cross.aso:o."""

    lemma: str
    frame_slot: FrameSlot

    def __post_init__(self):
        if not self.lemma or any(ch.isspace() for ch in self.lemma):
            raise DataError(f"verb lemma must be non-empty without whitespace: {self.lemma!r}")

    @classmethod
    def parse(cls, text: str) -> "VerbSlot":
        lemma, dot, suffix = text.rpartition(".")
        slot = _SLOT_BY_SUFFIX.get(suffix)
        if not dot or slot is None:
            known = ", ".join(sorted(_SLOT_BY_SUFFIX))
            raise DataError(f"unknown verb slot suffix in {text!r} (expected one of: {known})")
        return cls(lemma, slot)

    def __str__(self) -> str:
        return f"{self.lemma}.{self.frame_slot.value}"


def _check_token(token: str, what: str) -> str:
    if not token or any(ch.isspace() for ch in token):
        raise DataError(f"{what} must be non-empty without whitespace: {token!r}")
    return token


@dataclass(eq=False)
class PairCorpus:
    """Sparse (verb slot, noun) count table with interned vocabularies.

    Pairs are stored in first-appearance order as parallel arrays; the
    duplicate observations of a pair are summed in place. Immutable after
    construction and safe for concurrent reads.
    """

    verb_vocab: tuple[VerbSlot, ...]
    noun_vocab: tuple[str, ...]
    verb_ids: np.ndarray  # (nnz,) int64, parallel to counts
    noun_ids: np.ndarray  # (nnz,) int64
    counts: np.ndarray  # (nnz,) float64, strictly positive
    total: float
    verb_index: dict[VerbSlot, int] = field(repr=False)
    noun_index: dict[str, int] = field(repr=False)
    _pair_pos: dict[tuple[int, int], int] = field(repr=False)
    _verb_rows: list[list[int]] = field(repr=False)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[VerbSlot | str, str, float]]) -> "PairCorpus":
        """Build a corpus from (verb, noun, count) triples, summing duplicates."""
        verb_index: dict[VerbSlot, int] = {}
        noun_index: dict[str, int] = {}
        pair_pos: dict[tuple[int, int], int] = {}
        verbs: list[VerbSlot] = []
        nouns: list[str] = []
        vids: list[int] = []
        nids: list[int] = []
        cnts: list[float] = []
        verb_rows: list[list[int]] = []

        for verb, noun, count in pairs:
            if isinstance(verb, str):
                verb = VerbSlot.parse(verb)
            _check_token(noun, "noun token")
            count = float(count)
            if not math.isfinite(count) or count <= 0.0:
                raise DataError(f"pair count must be a positive finite number, got {count!r}")
            vi = verb_index.get(verb)
            if vi is None:
                vi = verb_index[verb] = len(verbs)
                verbs.append(verb)
                verb_rows.append([])
            ni = noun_index.get(noun)
            if ni is None:
                ni = noun_index[noun] = len(nouns)
                nouns.append(noun)
            pos = pair_pos.get((vi, ni))
            if pos is None:
                pair_pos[(vi, ni)] = len(cnts)
                verb_rows[vi].append(len(cnts))
                vids.append(vi)
                nids.append(ni)
                cnts.append(count)
            else:
                cnts[pos] += count

        counts = np.asarray(cnts, dtype=np.float64)
        return cls(
            verb_vocab=tuple(verbs),
            noun_vocab=tuple(nouns),
            verb_ids=np.asarray(vids, dtype=np.int64),
            noun_ids=np.asarray(nids, dtype=np.int64),
            counts=counts,
            total=math.fsum(cnts),
            verb_index=verb_index,
            noun_index=noun_index,
            _pair_pos=pair_pos,
            _verb_rows=verb_rows,
        )

    @property
    def n_pairs(self) -> int:
        return len(self.counts)

    def count(self, verb: VerbSlot, noun: str) -> float:
        """Observed count of (verb, noun); 0.0 for anything unseen."""
        vi = self.verb_index.get(verb)
        ni = self.noun_index.get(noun)
        if vi is None or ni is None:
            return 0.0
        pos = self._pair_pos.get((vi, ni))
        return float(self.counts[pos]) if pos is not None else 0.0

    def noun_totals(self) -> np.ndarray:
        """Per-noun marginal counts, aligned with noun_vocab."""
        return np.bincount(self.noun_ids, weights=self.counts, minlength=len(self.noun_vocab))


@dataclass(eq=False)
class NounSample:
    """Noun frequencies observed with one verb slot; size is their sum."""

    verb: VerbSlot
    freqs: dict[str, float]
    size: float


@dataclass(eq=False)
class Distribution:
    """A normalized distribution over noun tokens."""

    tokens: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        self._cum = np.cumsum(self.probs)


@dataclass(eq=False)
class Dictionary:
    """Source word to ordered, duplicate-free translation alternatives."""

    entries: dict[str, tuple[str, ...]]


@dataclass(frozen=True)
class BilingualTestItem:
    """One gold-annotated target-word selection problem."""

    item_id: str
    verb: VerbSlot
    source_noun: str
    gold_target: str
    candidates: tuple[str, ...]


def load_pairs(path) -> PairCorpus:
    """Load a tab-separated pair file into a PairCorpus.

    Each data line is "verb.slot<TAB>noun<TAB>count" with a positive count;
    duplicate (verb, noun) lines are summed. Vocabulary order is the order
    of first appearance in the file.
    """

    def parsed():
        for line_no, line in data_lines(path):
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(path, line_no, f"expected 3 tab-separated fields, got {len(fields)}")
            verb_text, noun, count_text = fields
            try:
                verb = VerbSlot.parse(verb_text)
                _check_token(noun, "noun token")
                try:
                    count = float(count_text)
                except ValueError:
                    raise DataError(f"bad count {count_text!r}") from None
                if not math.isfinite(count) or count <= 0.0:
                    raise DataError(f"count must be positive, got {count_text!r}")
            except DataError as exc:
                raise ParseError(path, line_no, str(exc)) from None
            yield verb, noun, count

    corpus = PairCorpus.from_pairs(parsed())
    if corpus.n_pairs == 0:
        raise DataError(f"{path}: no pairs found")
    return corpus


def save_pairs(corpus: PairCorpus, path) -> None:
    """Write a corpus back to pair-file format; load_pairs round-trips it."""
    lines = []
    for vi, ni, count in zip(corpus.verb_ids, corpus.noun_ids, corpus.counts):
        lines.append(f"{corpus.verb_vocab[vi]}\t{corpus.noun_vocab[ni]}\t{fmt17(count)}")
    write_text(path, lines)


def marginal_noun_dist(corpus: PairCorpus) -> Distribution:
    """Marginal noun distribution of the corpus: p(n) = sum_v count(v,n) / total."""
    if corpus.n_pairs == 0 or corpus.total <= 0.0:
        raise DataError("cannot take a noun marginal of an empty corpus")
    totals = corpus.noun_totals()
    return Distribution(tokens=corpus.noun_vocab, probs=totals / totals.sum())


def object_sample(corpus: PairCorpus, verb: VerbSlot) -> NounSample:
    """All nouns observed with the given verb slot, with their counts."""
    vi = corpus.verb_index.get(verb)
    if vi is None or not corpus._verb_rows[vi]:
        raise NotFoundError(f"verb slot {verb} has no pairs in this corpus")
    freqs: dict[str, float] = {}
    for pos in corpus._verb_rows[vi]:
        freqs[corpus.noun_vocab[corpus.noun_ids[pos]]] = float(corpus.counts[pos])
    return NounSample(verb=verb, freqs=freqs, size=math.fsum(freqs.values()))


def sample_noun(dist: Distribution, rng: np.random.Generator) -> str:
    """Draw one noun with probability equal to its mass; seed-deterministic."""
    idx = int(np.searchsorted(dist._cum, rng.random(), side="right"))
    return dist.tokens[min(idx, len(dist.tokens) - 1)]


def load_dictionary(path) -> Dictionary:
    """Load "source<TAB>target1,target2,..." lines; targets must be unique, >= 2."""
    entries: dict[str, tuple[str, ...]] = {}
    for line_no, line in data_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(path, line_no, f"expected 2 tab-separated fields, got {len(fields)}")
        source, targets_text = fields
        try:
            _check_token(source, "source word")
            targets = tuple(_check_token(t.strip(), "target noun") for t in targets_text.split(","))
        except DataError as exc:
            raise ParseError(path, line_no, str(exc)) from None
        if len(targets) < 2:
            raise ParseError(path, line_no, f"entry {source!r} needs at least 2 targets")
        if len(set(targets)) != len(targets):
            raise ParseError(path, line_no, f"duplicate targets for {source!r}")
        if source in entries:
            raise ParseError(path, line_no, f"duplicate dictionary entry {source!r}")
        entries[source] = targets
    if not entries:
        raise DataError(f"{path}: no dictionary entries found")
    return Dictionary(entries=entries)


def load_bilingual(path) -> list[BilingualTestItem]:
    """Load bilingual test items; the gold target must be among the candidates."""
    items: list[BilingualTestItem] = []
    for line_no, line in data_lines(path):
        fields = line.split("\t")
        if len(fields) != 5:
            raise ParseError(path, line_no, f"expected 5 tab-separated fields, got {len(fields)}")
        item_id, verb_text, source_noun, gold, cands_text = fields
        try:
            verb = VerbSlot.parse(verb_text)
            _check_token(source_noun, "source noun")
            _check_token(gold, "gold target")
            candidates = tuple(_check_token(c.strip(), "candidate") for c in cands_text.split(","))
        except DataError as exc:
            raise ParseError(path, line_no, str(exc)) from None
        if len(candidates) < 2:
            raise ParseError(path, line_no, "need at least 2 candidates")
        if len(set(candidates)) != len(candidates):
            raise ParseError(path, line_no, "duplicate candidates")
        if gold not in candidates:
            raise ParseError(path, line_no, f"gold target {gold!r} not among candidates")
        items.append(BilingualTestItem(item_id, verb, source_noun, gold, candidates))
    if not items:
        raise DataError(f"{path}: no test items found")
    return items
