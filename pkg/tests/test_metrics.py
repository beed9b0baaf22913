import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sentsimp.metrics import (
    EvalInstance,
    MetricReport,
    bleu,
    copy_rate,
    count_syllables,
    evaluate_all,
    fkgl,
    sari,
    sari_instance,
    self_bleu,
)


class TestBleu:
    def test_identity_is_100(self):
        outs = ["the cat sat on the mat", "a dog ran"]
        assert bleu(outs, [[o] for o in outs]) == pytest.approx(100.0, abs=1e-9)

    def test_disjoint_is_zero(self):
        assert bleu(["x y z"], [["a b c"]]) == 0.0

    def test_hand_computed_case(self):
        # p1 = p2 = p3 = 1 over effective orders, BP = exp(1 - 4/3)
        score = bleu(["the cat sat"], [["the cat sat down"]])
        assert score == pytest.approx(100.0 * math.exp(1.0 - 4.0 / 3.0), abs=1e-6)
        assert score == pytest.approx(71.65, abs=0.01)

    def test_multi_reference_clipping(self):
        # the doubled "the" only fully matches via the per-n-gram max over
        # references; a single reference clips it down
        multi = bleu(["the the cat"], [["the the cat dog", "the cat"]])
        single = bleu(["the the cat"], [["the cat"]])
        assert multi == pytest.approx(100.0 * math.exp(1.0 - 4.0 / 3.0), abs=1e-6)
        assert single < multi

    def test_zero_precision_zeroes_score(self):
        # an effective order with zero matches gives corpus BLEU 0 (no smoothing)
        assert bleu(["the the the"], [["the cat", "the the dog"]]) == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        words = list("abcd")
        for _ in range(10):
            outs, refsets = [], []
            n = int(rng.integers(1, 6))
            for _ in range(n):
                outs.append(" ".join(rng.choice(words, size=rng.integers(1, 8))))
                refsets.append([" ".join(rng.choice(words, size=rng.integers(1, 8)))
                                for _ in range(int(rng.integers(1, 3)))])
            assert bleu(outs, refsets) == pytest.approx(
                _brute_bleu(outs, refsets), abs=1e-9)

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            bleu([], [])


def _brute_bleu(outputs, refsets, max_n=4):
    """Independent corpus BLEU: explicit n-gram lists, closest ref length."""
    stats = {n: [0, 0] for n in range(1, max_n + 1)}
    c_len = r_len = 0
    for out, refs in zip(outputs, refsets):
        o = out.split()
        rs = [r.split() for r in refs]
        c_len += len(o)
        best = rs[0]
        for r in rs[1:]:
            if abs(len(r) - len(o)) < abs(len(best) - len(o)):
                best = r
        r_len += len(best)
        for n in range(1, max_n + 1):
            grams = [tuple(o[i:i + n]) for i in range(len(o) - n + 1)]
            ref_counts = Counter()
            for r in rs:
                counts = Counter(tuple(r[i:i + n]) for i in range(len(r) - n + 1))
                for g, c in counts.items():
                    ref_counts[g] = max(ref_counts[g], c)
            clipped = Counter(grams) & ref_counts
            stats[n][0] += sum(clipped.values())
            stats[n][1] += len(grams)
    logs = []
    for n in range(1, max_n + 1):
        match, total = stats[n]
        if total == 0:
            continue
        if match == 0:
            return 0.0
        logs.append(math.log(match / total))
    if not logs or c_len == 0:
        return 0.0
    bp = 1.0 if c_len > r_len else math.exp(1 - r_len / c_len)
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


def _brute_sari_instance(source, output, refs):
    """Independent per-instance SARI with the zero-candidate convention."""
    def ngrams(tokens, n):
        return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))

    def value(cand, target, numerator_fn):
        if not cand:
            return 1.0 if not target else 0.0
        return numerator_fn() / len(cand)

    s_tok, o_tok = source.split(), output.split()
    r_toks = [r.split() for r in refs]
    numref = len(r_toks)
    keep_scores, del_scores, add_scores = [], [], []
    for n in range(1, 5):
        s = Counter({g: c * numref for g, c in ngrams(s_tok, n).items()})
        o = Counter({g: c * numref for g, c in ngrams(o_tok, n).items()})
        r = Counter()
        for rt in r_toks:
            r.update(ngrams(rt, n))
        keep_cand, keep_all = s & o, s & r
        keep_good = (s & o) & r
        p = value(keep_cand, keep_all,
                  lambda: sum(keep_good[g] / keep_cand[g] for g in keep_good))
        q = value(keep_all, keep_cand,
                  lambda: sum(keep_good[g] / keep_all[g] for g in keep_good))
        keep_scores.append(0.0 if p + q == 0 else 2 * p * q / (p + q))

        del_cand, del_all = s - o, s - r
        del_good = (s - o) - r
        del_scores.append(value(del_cand, del_all,
                                lambda: sum(del_good[g] / del_cand[g] for g in del_good)))

        add_cand = set(o) - set(s)
        add_all = set(r) - set(s)
        add_good = add_cand & set(r)
        p = value(add_cand, add_all, lambda: float(len(add_good)))
        q = value(add_all, add_cand, lambda: float(len(add_good)))
        add_scores.append(0.0 if p + q == 0 else 2 * p * q / (p + q))
    return (sum(keep_scores) / 4, sum(del_scores) / 4, sum(add_scores) / 4)


class TestSari:
    def test_identity_composite(self):
        # output = source = reference: every operation scores 1 by the
        # zero-candidate convention, so the composite is 100
        text = "the cat sat ."
        assert sari([text], [text], [[text]]) == pytest.approx(100.0)

    def test_good_deletion(self):
        keep_f, del_p, add_f = sari_instance("a b c", "a c", ["a c"])
        assert del_p == pytest.approx(1.0)
        assert keep_f == pytest.approx(1.0)
        assert add_f == pytest.approx(1.0)  # nothing to add on either side

    def test_missed_deletion(self):
        # padded so every n-gram order has candidates: b should be deleted
        # but was not, so deletion precision is 0 at every order
        keep_f, del_p, add_f = sari_instance("a b x y", "a b x y", ["a d x y"])
        assert del_p == pytest.approx(0.0)

    def test_missed_deletion_short_pair_uses_convention(self):
        # at orders 3 and 4 both candidate and target sets are empty, which the
        # zero-candidate convention scores as 1, so the average over n is 0.5
        # (the unigram deletion precision itself is 0)
        _, del_p, _ = sari_instance("a b", "a b", ["a d"])
        assert del_p == pytest.approx(0.5)

    def test_components_within_unit_interval(self):
        for parts in (sari_instance("a b c", "a q", ["a b", "c d"]),):
            for part in parts:
                assert 0.0 <= part <= 1.0

    def test_composite_is_mean_of_ops(self):
        src, out, refs = "a b c d", "a c e", ["a c", "a b e"]
        keep_f, del_p, add_f = sari_instance(src, out, refs)
        assert sari([src], [out], [refs]) == pytest.approx(
            100.0 * (keep_f + del_p + add_f) / 3.0)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        words = list("abcde")
        for _ in range(50):
            src = " ".join(rng.choice(words, size=rng.integers(1, 7)))
            out = " ".join(rng.choice(words, size=rng.integers(1, 7)))
            refs = [" ".join(rng.choice(words, size=rng.integers(1, 7)))
                    for _ in range(int(rng.integers(1, 4)))]
            got = sari_instance(src, out, refs)
            expected = _brute_sari_instance(src, out, refs)
            assert got == pytest.approx(expected, abs=1e-9)

    def test_permutation_invariance(self):
        srcs = ["a b c", "d e", "f g h"]
        outs = ["a c", "d", "f h g"]
        refs = [["a c"], ["d e"], ["f g"]]
        base = sari(srcs, outs, refs)
        perm = [2, 0, 1]
        assert sari([srcs[i] for i in perm], [outs[i] for i in perm],
                    [refs[i] for i in perm]) == pytest.approx(base)


class TestFkgl:
    def test_hand_case(self):
        assert fkgl("the cat sat on the mat .") == pytest.approx(-1.45, abs=0.01)

    def test_newline_split_lowers_score(self):
        one_line = "the cat sat on the mat and the dog ran away now"
        two_lines = "the cat sat on the mat\nand the dog ran away now"
        assert fkgl(two_lines) < fkgl(one_line)

    def test_punctuation_excluded_from_words(self):
        assert fkgl("cat .") == fkgl("cat")

    def test_zero_words_error(self):
        with pytest.raises(ValueError):
            fkgl(". . .")
        with pytest.raises(ValueError):
            fkgl("")

    def test_syllable_counter(self):
        assert count_syllables("the") == 1
        assert count_syllables("cat") == 1
        assert count_syllables("made") == 1
        assert count_syllables("see") == 1
        assert count_syllables("happy") == 2
        assert count_syllables("sentence") == 2
        assert count_syllables("arduous") == 2  # two contiguous vowel groups: a, uou
        assert count_syllables("enormous") == 3
        assert count_syllables("90") == 1

    def test_multisyllabic_text_scores_higher(self):
        simple = "the cat sat"
        complex_ = "the enormous dextromethorphan precipitated"
        assert fkgl(complex_) > fkgl(simple)


class TestSelfBleuAndCopy:
    def test_self_bleu_identity(self):
        outs = ["a b c d", "e f g"]
        assert self_bleu(outs, outs) == pytest.approx(100.0, abs=1e-9)

    def test_self_bleu_disjoint(self):
        assert self_bleu(["x y"], ["a b"]) == 0.0

    def test_copy_rate_bounds(self):
        assert copy_rate(["a b"], ["a b"]) == 100.0
        assert copy_rate(["a b"], ["a c"]) == 0.0
        assert copy_rate(["a", "b"], ["a", "x"]) == 50.0


class TestEvaluateAll:
    def test_report_fields_and_ranges(self):
        instances = [
            EvalInstance("the big cat sat .", "the cat sat .", ("the cat sat .",)),
            EvalInstance("a dog ran far .", "a dog ran .", ("a dog ran .", "dogs run .")),
        ]
        report = evaluate_all(instances)
        assert 0 <= report.sari <= 100
        assert 0 <= report.bleu <= 100
        assert 0 <= report.s_bleu <= 100
        assert 0 <= report.copy_rate <= 100
        assert report.copy_rate == 0.0

    def test_json_and_table_stable(self):
        instances = [EvalInstance("a b", "a", ("a",))]
        report = evaluate_all(instances)
        assert report.to_json() == evaluate_all(instances).to_json()
        assert "SARI" in report.to_table()

    def test_reference_required(self):
        with pytest.raises(ValueError):
            EvalInstance("a", "a", ())


@given(st.lists(st.text(alphabet="abc ", min_size=1, max_size=12), min_size=1, max_size=5))
@settings(max_examples=30, deadline=None)
def test_bleu_identity_property(lines):
    outs = [" ".join(line.split()) or "a" for line in lines]
    assert bleu(outs, [[o] for o in outs]) == pytest.approx(100.0, abs=1e-9)
