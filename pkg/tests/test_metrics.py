import itertools
import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from signpipe.metrics import (
    EmptyCorpus,
    LineCountMismatch,
    TokenizedPair,
    bleu,
    lcs_length,
    pair,
    rouge_l,
    score_files,
    score_pairs,
    tokenize,
)

WORDS = ("wind", "river", "stone", "light", "door", "seven", "green", "talk")


def random_pairs(rng, n_pairs, min_len=4, max_len=12):
    pairs = []
    for _ in range(n_pairs):
        hyp = [rng.choice(WORDS) for _ in range(rng.randint(min_len, max_len))]
        ref = [rng.choice(WORDS) for _ in range(rng.randint(min_len, max_len))]
        pairs.append(TokenizedPair(tuple(hyp), tuple(ref)))
    return pairs


class TestTokenize:
    def test_punctuation_detached(self):
        assert tokenize("Hello, world!") == ["Hello", ",", "world", "!"]

    def test_empty(self):
        assert tokenize("") == []

    def test_whitespace_collapse(self):
        assert tokenize("a   b") == ["a", "b"]
        assert tokenize("  a\tb  ") == ["a", "b"]

    def test_numbers_keep_separators(self):
        assert tokenize("It costs 3.2 dinars.") == ["It", "costs", "3.2", "dinars", "."]
        assert tokenize("24,111 clips") == ["24,111", "clips"]

    def test_dash_after_digit_splits(self):
        assert tokenize("pages 16-17") == ["pages", "16", "-", "17"]

    def test_entities_unescaped(self):
        assert tokenize("he said &quot;go&quot;") == ["he", "said", '"', "go", '"']
        assert tokenize("a &amp; b") == ["a", "&", "b"]

    def test_lowercase_flag(self):
        assert tokenize("Hello WORLD", lowercase=True) == ["hello", "world"]
        assert tokenize("Hello WORLD") == ["Hello", "WORLD"]

    def test_non_ascii_words_pass_through(self):
        assert tokenize("مرحبا بالعالم") == ["مرحبا", "بالعالم"]

    def test_pair_applies_same_tokenizer(self):
        p = pair("Hello, there", "Hello there!")
        assert p.hypothesis == ("Hello", ",", "there")
        assert p.reference == ("Hello", "there", "!")


class TestBleu:
    def test_single_substitution_order_one(self):
        result = bleu([pair("a b c", "a b d")], max_order=1)
        assert result.score == 66.66666666666669
        assert result.precisions == (pytest.approx(100.0 * 2 / 3),)
        assert result.brevity_penalty == 1.0

    def test_disjoint_corpus_smoothing_chain(self):
        result = bleu([pair("a b c d e", "f g h i j")], max_order=4)
        assert result.precisions == (10.0, 6.25, pytest.approx(100 / 24), 3.125)
        assert result.score == 5.341087579952926
        assert result.brevity_penalty == 1.0

    def test_identity_is_exactly_100(self):
        rng = random.Random(1)
        pairs = random_pairs(rng, 20)
        identical = [TokenizedPair(p.hypothesis, p.hypothesis) for p in pairs]
        for order in (1, 2, 3, 4):
            result = bleu(identical, max_order=order)
            assert result.score == 100.0
            assert result.brevity_penalty == 1.0
            assert all(p == 100.0 for p in result.precisions)

    def test_identity_with_one_short_pair_still_100(self):
        pairs = [
            TokenizedPair(("so",), ("so",)),
            TokenizedPair(tuple("abcdef"), tuple("abcdef")),
        ]
        assert bleu(pairs).score == 100.0

    def test_brevity_penalty_applies_when_short(self):
        result = bleu([pair("a b", "a b c d")], max_order=1)
        assert result.hyp_length == 2
        assert result.ref_length == 4
        assert result.brevity_penalty == pytest.approx(2.718281828459045 ** (1 - 2.0))
        assert result.score == pytest.approx(100.0 * result.brevity_penalty)

    def test_no_penalty_when_longer(self):
        result = bleu([pair("a b c d", "a b")], max_order=1)
        assert result.brevity_penalty == 1.0

    def test_empty_hypothesis_side(self):
        result = bleu([pair("", "a b c")], max_order=1)
        assert result.brevity_penalty == 0.0
        assert result.score == 0.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            bleu([])

    def test_bad_order_rejected(self):
        with pytest.raises(ValueError):
            bleu([pair("a", "a")], max_order=5)
        with pytest.raises(ValueError):
            bleu([pair("a", "a")], max_order=0)

    def test_permutation_invariance(self):
        rng = random.Random(2)
        pairs = random_pairs(rng, 15)
        base = bleu(pairs)
        shuffled = list(pairs)
        rng.shuffle(shuffled)
        again = bleu(shuffled)
        assert again.score == base.score
        assert again.precisions == base.precisions
        assert again.brevity_penalty == base.brevity_penalty

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_scores_bounded(self, seed):
        rng = random.Random(seed)
        pairs = random_pairs(rng, rng.randint(1, 10), min_len=1, max_len=9)
        for order in (1, 4):
            result = bleu(pairs, max_order=order)
            assert 0.0 <= result.score <= 100.0
            assert all(0.0 <= p <= 100.0 for p in result.precisions)

    def test_clipping_counts_against_reference(self):
        # "the the the" can only claim as many "the" as the reference holds
        result = bleu([pair("the the the", "the cat")], max_order=1)
        assert result.precisions[0] == pytest.approx(100.0 / 3)


class TestRougeL:
    def test_identical_pair(self):
        assert rouge_l([pair("a b c", "a b c")]) == 100.0

    def test_hand_computed_f1(self):
        assert rouge_l([pair("a b c d", "a c d")]) == pytest.approx(
            100.0 * 6 / 7
        )

    def test_disjoint_is_zero(self):
        assert rouge_l([pair("a b c", "x y z")]) == 0.0

    def test_mean_over_pairs(self):
        pairs = [pair("a b c", "a b c"), pair("a b c", "x y z")]
        assert rouge_l(pairs) == pytest.approx(50.0)

    def test_empty_sides(self):
        assert rouge_l([pair("", "a b")]) == 0.0
        assert rouge_l([pair("a b", "")]) == 0.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            rouge_l([])

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=150, deadline=None)
    def test_swap_invariance(self, seed):
        rng = random.Random(seed)
        pairs = random_pairs(rng, rng.randint(1, 6), min_len=0, max_len=8)
        swapped = [TokenizedPair(p.reference, p.hypothesis) for p in pairs]
        assert rouge_l(pairs) == pytest.approx(rouge_l(swapped), abs=1e-12)


class TestLcs:
    @staticmethod
    def brute_force(a, b):
        best = 0
        for r in range(len(a), 0, -1):
            for idx in itertools.combinations(range(len(a)), r):
                candidate = [a[i] for i in idx]
                it = iter(b)
                if all(tok in it for tok in candidate):
                    best = r
                    break
            if best:
                break
        return best

    def test_empty(self):
        assert lcs_length([], ["a"]) == 0
        assert lcs_length(["a"], []) == 0

    def test_known_cases(self):
        assert lcs_length("abcde", "ace") == 3
        assert lcs_length("abc", "abc") == 3
        assert lcs_length("abc", "def") == 0

    @given(st.integers(min_value=0, max_value=100_000))
    @settings(max_examples=300, deadline=None)
    def test_matches_exhaustive_search(self, seed):
        rng = random.Random(seed)
        alphabet = "abc"
        a = [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
        b = [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
        assert lcs_length(a, b) == self.brute_force(a, b)


class TestGoldenCorpus:
    def test_bleu_matches_frozen_oracle(self, golden_paths, golden_scores):
        hyp, ref = golden_paths
        report = score_files(hyp, ref)
        for order in (1, 2, 3, 4):
            got = getattr(report, f"bleu_{order}")
            assert got == pytest.approx(golden_scores[f"bleu_{order}"], abs=1e-6)

    def test_lowercase_variant_matches(self, golden_paths, golden_scores):
        hyp, ref = golden_paths
        report = score_files(hyp, ref, lowercase=True)
        for order in (1, 2, 3, 4):
            got = getattr(report, f"bleu_{order}")
            assert got == pytest.approx(
                golden_scores[f"bleu_{order}_lowercase"], abs=1e-6
            )

    def test_corpus_statistics_match(self, golden_paths, golden_scores):
        hyp, ref = golden_paths
        result = bleu(
            [pair(h, r) for h, r in zip(
                hyp.read_text(encoding="utf-8").splitlines(),
                ref.read_text(encoding="utf-8").splitlines(),
            )]
        )
        assert result.hyp_length == golden_scores["hyp_length"]
        assert result.ref_length == golden_scores["ref_length"]
        assert result.brevity_penalty == pytest.approx(
            golden_scores["brevity_penalty"], abs=1e-9
        )
        for got, want in zip(result.precisions, golden_scores["precisions"]):
            assert got == pytest.approx(want, abs=1e-9)

    def test_rouge_matches_frozen_oracle(self, golden_paths, golden_scores):
        hyp, ref = golden_paths
        report = score_files(hyp, ref)
        assert report.rouge_l == pytest.approx(golden_scores["rouge_l"], abs=1e-6)

    def test_identity_on_golden_corpus(self, golden_paths):
        hyp, _ = golden_paths
        report = score_files(hyp, hyp)
        assert report.bleu_4 == 100.0
        assert report.rouge_l == 100.0


class TestScoreFiles:
    def test_line_count_mismatch(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("one\ntwo\n", encoding="utf-8")
        b.write_text("one\n", encoding="utf-8")
        with pytest.raises(LineCountMismatch):
            score_files(a, b)

    def test_missing_file(self, tmp_path):
        present = tmp_path / "here.txt"
        present.write_text("x\n", encoding="utf-8")
        with pytest.raises(FileNotFoundError):
            score_files(tmp_path / "missing.txt", present)

    def test_empty_files_rejected(self, tmp_path):
        a = tmp_path / "a.txt"
        a.write_text("", encoding="utf-8")
        with pytest.raises(EmptyCorpus):
            score_files(a, a)

    def test_identical_files_all_100(self, tmp_path):
        text = "the river runs east\nseven green doors\n"
        a = tmp_path / "a.txt"
        a.write_text(text, encoding="utf-8")
        report = score_files(a, a)
        assert (report.bleu_1, report.bleu_2, report.bleu_3, report.bleu_4) == (
            100.0, 100.0, 100.0, 100.0,
        )
        assert report.rouge_l == 100.0
        assert report.n_pairs == 2


class TestScoreReport:
    def report(self):
        return score_pairs([pair("a b c d", "a b c d"), pair("w x y z", "w x q z")])

    def test_table_columns(self):
        text = self.report().render_table()
        head = text.splitlines()[0]
        for column in ("BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-L", "BLEURT"):
            assert column in head
        assert "n/a (out of scope)" in text
        assert "pairs = 2" in text

    def test_csv_shape(self):
        lines = self.report().render_csv().splitlines()
        assert lines[0] == "BLEU-1,BLEU-2,BLEU-3,BLEU-4,ROUGE-L,BLEURT"
        cells = lines[1].split(",")
        assert len(cells) == 6
        for cell in cells[:5]:
            assert re.fullmatch(r"\d+\.\d{4}", cell)
        assert cells[5] == "n/a (out of scope)"

    def test_empty_rejected(self):
        with pytest.raises(EmptyCorpus):
            score_pairs([])

    def test_scores_in_range(self):
        report = self.report()
        for value in (report.bleu_1, report.bleu_2, report.bleu_3,
                      report.bleu_4, report.rouge_l):
            assert 0.0 <= value <= 100.0
