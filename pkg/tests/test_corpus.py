import math

import numpy as np
import pytest

from problex import (
    DataError,
    Distribution,
    FrameSlot,
    NotFoundError,
    PairCorpus,
    ParseError,
    VerbSlot,
    load_bilingual,
    load_dictionary,
    load_pairs,
    marginal_noun_dist,
    object_sample,
    sample_noun,
    save_pairs,
)

from conftest import random_corpus


def write(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class TestVerbSlot:
    def test_parse_and_canonical_form(self):
        verb = VerbSlot.parse("cross.aso:o")
        assert verb.lemma == "cross"
        assert verb.frame_slot is FrameSlot.TRANS_OBJ
        assert str(verb) == "cross.aso:o"
        assert VerbSlot.parse("become.as:s").frame_slot is FrameSlot.INTRANS_SUBJ
        assert VerbSlot.parse("have.aso:s").frame_slot is FrameSlot.TRANS_SUBJ

    def test_lemma_may_contain_dots(self):
        assert VerbSlot.parse("e.g.aso:o").lemma == "e.g"

    def test_rejects_unknown_suffix_and_bad_lemma(self):
        with pytest.raises(DataError):
            VerbSlot.parse("cross.xyz:o")
        with pytest.raises(DataError):
            VerbSlot.parse("cross")
        with pytest.raises(DataError):
            VerbSlot.parse(".aso:o")
        with pytest.raises(DataError):
            VerbSlot("has space", FrameSlot.TRANS_OBJ)


class TestLoadPairs:
    def test_basic_load(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write(path, ["cross.aso:o\tborder\t3", "cross.aso:o\tmind\t5"])
        corpus = load_pairs(path)
        assert corpus.total == 8.0
        assert corpus.noun_vocab == ("border", "mind")
        assert corpus.verb_vocab == (VerbSlot.parse("cross.aso:o"),)

    def test_duplicate_lines_sum(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write(path, ["enter.aso:o\troom\t2", "enter.aso:o\troom\t2"])
        corpus = load_pairs(path)
        assert corpus.n_pairs == 1
        assert corpus.count(VerbSlot.parse("enter.aso:o"), "room") == 4.0

    def test_unknown_slot_suffix_reports_line(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write(path, ["cross.xyz:o\tborder\t1"])
        with pytest.raises(ParseError) as err:
            load_pairs(path)
        assert err.value.line_no == 1

    @pytest.mark.parametrize(
        "line",
        ["cross.aso:o\tborder\t0", "cross.aso:o\tborder\t-2", "cross.aso:o\tborder\tmany",
         "cross.aso:o\tborder", "cross.aso:o\tborder\t1\textra", "cross.aso:o\t\t1"],
    )
    def test_malformed_lines_rejected(self, tmp_path, line):
        path = tmp_path / "pairs.tsv"
        write(path, ["enter.aso:o\troom\t2", line])
        with pytest.raises(ParseError) as err:
            load_pairs(path)
        assert err.value.line_no == 2

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write(path, ["# extraction run 1", "", "enter.aso:o\troom\t2"])
        assert load_pairs(path).total == 2.0

    def test_vocab_order_is_first_appearance(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write(path, ["b.aso:o\tzebra\t1", "a.aso:o\tapple\t1", "b.aso:o\tapple\t1"])
        corpus = load_pairs(path)
        assert [str(v) for v in corpus.verb_vocab] == ["b.aso:o", "a.aso:o"]
        assert corpus.noun_vocab == ("zebra", "apple")

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        write(path, ["# nothing here"])
        with pytest.raises(DataError):
            load_pairs(path)

    def test_total_matches_stored_counts(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            corpus = random_corpus(rng)
            assert math.isclose(corpus.total, float(corpus.counts.sum()), rel_tol=1e-9)


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        rng = np.random.default_rng(17)
        for trial in range(5):
            corpus = random_corpus(rng)
            # fractional counts must survive exactly
            corpus = PairCorpus.from_pairs(
                (corpus.verb_vocab[v], corpus.noun_vocab[n], c * 1.37)
                for v, n, c in zip(corpus.verb_ids, corpus.noun_ids, corpus.counts)
            )
            path = tmp_path / f"pairs{trial}.tsv"
            save_pairs(corpus, path)
            reloaded = load_pairs(path)
            assert reloaded.verb_vocab == corpus.verb_vocab
            assert reloaded.noun_vocab == corpus.noun_vocab
            assert np.array_equal(reloaded.verb_ids, corpus.verb_ids)
            assert np.array_equal(reloaded.noun_ids, corpus.noun_ids)
            assert np.array_equal(reloaded.counts, corpus.counts)


class TestMarginal:
    def test_proportional_counts(self):
        corpus = PairCorpus.from_pairs([("v1.aso:o", "a", 1.0), ("v1.aso:o", "b", 3.0)])
        dist = marginal_noun_dist(corpus)
        assert dist.tokens == ("a", "b")
        np.testing.assert_allclose(dist.probs, [0.25, 0.75], rtol=0, atol=0)

    def test_single_noun(self):
        corpus = PairCorpus.from_pairs([("v1.aso:o", "a", 7.0)])
        np.testing.assert_array_equal(marginal_noun_dist(corpus).probs, [1.0])

    def test_against_hand_summed_ratios(self, tmp_path):
        # independent oracle: re-sum the raw file with plain string handling
        lines = [
            "take.aso:o\troad\t2.5",
            "take.aso:o\tturn\t6",
            "cross.aso:o\troad\t4",
            "cross.aso:o\tmind\t1.5",
        ]
        path = tmp_path / "pairs.tsv"
        write(path, lines)
        sums: dict[str, float] = {}
        for line in lines:
            _verb, noun, count = line.split("\t")
            sums[noun] = sums.get(noun, 0.0) + float(count)
        total = sum(sums.values())
        dist = marginal_noun_dist(load_pairs(path))
        for token, prob in zip(dist.tokens, dist.probs):
            assert abs(prob - sums[token] / total) <= 1e-12

    def test_sums_to_one(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            dist = marginal_noun_dist(random_corpus(rng))
            assert abs(float(dist.probs.sum()) - 1.0) <= 1e-12


class TestObjectSample:
    def test_single_pair(self):
        corpus = PairCorpus.from_pairs([("cross.aso:o", "border", 3.0)])
        sample = object_sample(corpus, VerbSlot.parse("cross.aso:o"))
        assert sample.freqs == {"border": 3.0}
        assert sample.size == 3.0

    def test_size_is_row_total(self):
        corpus = PairCorpus.from_pairs([("v.aso:o", "a", 1.0), ("v.aso:o", "b", 2.0)])
        assert object_sample(corpus, VerbSlot.parse("v.aso:o")).size == 3.0

    def test_absent_verb_is_not_found(self, tiny_corpus):
        with pytest.raises(NotFoundError):
            object_sample(tiny_corpus, VerbSlot.parse("fly.aso:o"))

    def test_masses_match_row_totals(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            corpus = random_corpus(rng)
            for vi, verb in enumerate(corpus.verb_vocab):
                sample = object_sample(corpus, verb)
                row_total = float(corpus.counts[corpus.verb_ids == vi].sum())
                assert math.isclose(sample.size, row_total, rel_tol=1e-9)


class TestSampleNoun:
    def test_degenerate(self):
        dist = Distribution(("only",), np.array([1.0]))
        rng = np.random.default_rng(0)
        assert all(sample_noun(dist, rng) == "only" for _ in range(20))

    def test_law_of_large_numbers(self):
        dist = Distribution(("a", "b"), np.array([0.5, 0.5]))
        rng = np.random.default_rng(42)
        draws = sum(sample_noun(dist, rng) == "a" for _ in range(100_000))
        assert abs(draws / 100_000 - 0.5) <= 0.01

    def test_seed_determinism(self):
        dist = Distribution(("a", "b", "c"), np.array([0.2, 0.3, 0.5]))
        first = [sample_noun(dist, np.random.default_rng(9)) for _ in range(1)]
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(9)
            runs.append([sample_noun(dist, rng) for _ in range(50)])
        assert runs[0] == runs[1]
        assert runs[0][0] == first[0]


class TestDictionary:
    def test_load(self, tmp_path):
        path = tmp_path / "dict.tsv"
        write(path, ["Grenze\tborder,frontier,boundary", "Karte\tcard,map"])
        dictionary = load_dictionary(path)
        assert dictionary.entries["Grenze"] == ("border", "frontier", "boundary")
        assert list(dictionary.entries) == ["Grenze", "Karte"]

    @pytest.mark.parametrize(
        "line", ["Grenze\tborder", "Grenze\tborder,border", "Grenze\tborder,frontier\textra"]
    )
    def test_bad_entries_rejected(self, tmp_path, line):
        path = tmp_path / "dict.tsv"
        write(path, [line])
        with pytest.raises(ParseError):
            load_dictionary(path)


class TestBilingual:
    def test_load(self, tmp_path):
        path = tmp_path / "test.tsv"
        write(path, ["160867\tcross.aso:o\tGrenze\tborder\tborder,frontier,boundary"])
        items = load_bilingual(path)
        assert len(items) == 1
        assert items[0].gold_target == "border"
        assert items[0].candidates == ("border", "frontier", "boundary")
        assert str(items[0].verb) == "cross.aso:o"

    @pytest.mark.parametrize(
        "line",
        [
            "1\tcross.aso:o\tGrenze\tedge\tborder,frontier",  # gold not a candidate
            "1\tcross.aso:o\tGrenze\tborder\tborder",  # fewer than 2 candidates
            "1\tcross.aso:o\tGrenze\tborder\tborder,border",  # duplicates
            "1\tcross.aso:o\tborder\tborder,frontier",  # missing field
        ],
    )
    def test_bad_items_rejected(self, tmp_path, line):
        path = tmp_path / "test.tsv"
        write(path, [line])
        with pytest.raises(ParseError):
            load_bilingual(path)
