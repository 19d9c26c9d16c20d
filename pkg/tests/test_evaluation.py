import math
import random
import statistics

import pytest

from adetag.corpus import CharSpan, normalize_spans
from adetag.errors import ConfigError
from adetag.evaluation import (
    EntityMatchReport,
    corpus_f1,
    load_familiar_words,
    load_predictions,
    mann_whitney_u,
    match_entities,
    mcnemar,
    prediction_text_stats,
    readability,
    syllable_count,
    write_predictions,
)

from oracles import mann_whitney_exact_p, mcnemar_exact_p


def spans(*pairs):
    return [CharSpan(a, b) for a, b in pairs]


class TestMatchEntities:
    # hand-counted fixtures, incl. overlap-only and adjacency cases
    CASES = [
        # (gold, pred, strict (tp,fp,fn), partial (tp,fp,fn))
        (spans((10, 20)), spans((10, 20)), (1, 0, 0), (1, 0, 0)),
        (spans((10, 20)), spans((12, 25)), (0, 1, 1), (1, 0, 0)),
        (spans((0, 5), (10, 15)), [], (0, 0, 2), (0, 0, 2)),
        ([], spans((3, 7)), (0, 1, 0), (0, 1, 0)),
        # adjacency is not overlap: (0,5) vs (5,9)
        (spans((0, 5)), spans((5, 9)), (0, 1, 1), (0, 1, 1)),
        # one pred overlapping two golds may only match one
        (spans((0, 5), (6, 10)), spans((3, 8)), (0, 1, 2), (1, 0, 1)),
        # two preds inside one gold: one match, one fp
        (spans((0, 10)), spans((0, 4), (5, 10)), (0, 2, 1), (1, 1, 0)),
        (spans((2, 4), (6, 9), (12, 20)), spans((2, 4), (7, 8), (21, 30)), (1, 2, 2), (2, 1, 1)),
    ]

    @pytest.mark.parametrize("gold,pred,strict_counts,partial_counts", CASES)
    def test_hand_counted(self, gold, pred, strict_counts, partial_counts):
        s = match_entities(gold, pred, "strict")
        assert (s.tp, s.fp, s.fn) == strict_counts
        p = match_entities(gold, pred, "partial")
        assert (p.tp, p.fp, p.fn) == partial_counts

    def test_exact_match_f1(self):
        r = match_entities(spans((10, 20)), spans((10, 20)), "strict")
        assert r.f1 == 1.0

    def test_overlap_partial_f1(self):
        r = match_entities(spans((10, 20)), spans((12, 25)), "partial")
        assert r.f1 == 1.0

    def test_empty_prediction_recall_zero(self):
        r = match_entities(spans((0, 5), (10, 15)), [], "strict")
        assert r.fn == 2 and r.recall == 0.0

    def test_per_gold_matched(self):
        r = match_entities(spans((0, 5), (10, 15)), spans((10, 15)), "strict")
        assert r.per_gold_matched == (False, True)

    def test_strict_le_partial_random(self):
        rng = random.Random(314)
        for _ in range(1000):
            gold = normalize_spans(spans(*((s, s + rng.randint(1, 6)) for s in rng.sample(range(0, 60, 2), rng.randint(0, 8)))))
            pred = normalize_spans(spans(*((s, s + rng.randint(1, 6)) for s in rng.sample(range(0, 60, 2), rng.randint(0, 8)))))
            strict = match_entities(gold, pred, "strict")
            partial = match_entities(gold, pred, "partial")
            assert strict.tp <= partial.tp
            assert strict.f1 <= partial.f1 + 1e-12

    def test_swap_symmetry(self):
        rng = random.Random(7)
        for _ in range(200):
            gold = normalize_spans(spans(*((s, s + rng.randint(1, 5)) for s in rng.sample(range(0, 50, 2), rng.randint(0, 6)))))
            pred = normalize_spans(spans(*((s, s + rng.randint(1, 5)) for s in rng.sample(range(0, 50, 2), rng.randint(0, 6)))))
            for mode in ("strict", "partial"):
                ab = match_entities(gold, pred, mode)
                ba = match_entities(pred, gold, mode)
                assert (ab.tp, ab.fp, ab.fn) == (ba.tp, ba.fn, ba.fp)


class TestCorpusF1:
    def test_hand_arithmetic(self):
        reports = [
            EntityMatchReport("strict", 1, 0, 0, (True,)),
            EntityMatchReport("strict", 0, 1, 1, (False,)),
        ]
        assert corpus_f1(reports) == (0.5, 0.5, 0.5)

    def test_all_correct(self):
        reports = [EntityMatchReport("strict", 2, 0, 0, (True, True))] * 3
        assert corpus_f1(reports) == (1.0, 1.0, 1.0)

    def test_degenerate_all_empty_predictions(self):
        reports = [EntityMatchReport("strict", 0, 0, 2, (False, False))]
        assert corpus_f1(reports) == (0.0, 0.0, 0.0)

    def test_order_invariant(self):
        reports = [
            EntityMatchReport("strict", 3, 1, 0, ()),
            EntityMatchReport("strict", 0, 2, 2, ()),
            EntityMatchReport("strict", 1, 0, 1, ()),
        ]
        assert corpus_f1(reports) == corpus_f1(reversed(reports))


class TestMcnemar:
    def test_no_discordance(self):
        assert mcnemar([True, False], [True, False]) == (0, 0, 1.0)

    def test_exact_5_15(self):
        a = [True] * 5 + [False] * 15
        b = [False] * 5 + [True] * 15
        b_count, c_count, p = mcnemar(a, b)
        assert (b_count, c_count) == (5, 15)
        assert p == pytest.approx(43400 / 1048576, abs=1e-6)
        assert p == pytest.approx(mcnemar_exact_p(5, 15), abs=1e-12)

    def test_chi_square_branch(self):
        a = [True] * 50 + [False] * 50
        b = [False] * 50 + [True] * 50
        _, _, p = mcnemar(a, b)
        assert p == pytest.approx(0.9203, abs=1e-3)

    def test_exact_matches_oracle(self):
        rng = random.Random(5)
        for _ in range(50):
            nb, nc = rng.randint(0, 12), rng.randint(0, 12)
            a = [True] * nb + [False] * nc + [True] * 5
            b = [False] * nb + [True] * nc + [True] * 5
            _, _, p = mcnemar(a, b)
            assert p == pytest.approx(mcnemar_exact_p(nb, nc), abs=1e-12)

    def test_swap_invariant(self):
        a = [True] * 7 + [False] * 3 + [True, False] * 4
        b = [False] * 7 + [True] * 3 + [True, False] * 4
        assert mcnemar(a, b)[2] == mcnemar(b, a)[2]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mcnemar([True], [True, False])

    def test_p_in_unit_interval(self):
        rng = random.Random(11)
        for _ in range(100):
            n = rng.randint(1, 60)
            a = [rng.random() < 0.5 for _ in range(n)]
            b = [rng.random() < 0.5 for _ in range(n)]
            _, _, p = mcnemar(a, b)
            assert 0.0 < p <= 1.0


class TestMannWhitney:
    def test_separated_exact(self):
        u, p = mann_whitney_u([1, 2, 3], [4, 5, 6])
        assert u == 0.0
        assert p == pytest.approx(0.1, abs=1e-12)

    def test_identical_multisets(self):
        u, p = mann_whitney_u([1, 2, 3], [1, 2, 3])
        assert u == pytest.approx(3 * 3 / 2)
        assert p >= 0.99

    def test_large_shift(self):
        rng = random.Random(0)
        xs = [rng.gauss(0, 1) for _ in range(100)]
        ys = [rng.gauss(3, 1) for _ in range(100)]
        _, p = mann_whitney_u(xs, ys)
        assert p < 0.001

    def test_u_complement(self):
        rng = random.Random(3)
        for _ in range(50):
            xs = [rng.random() for _ in range(rng.randint(1, 8))]
            ys = [rng.random() for _ in range(rng.randint(1, 8))]
            ux, _ = mann_whitney_u(xs, ys)
            uy, _ = mann_whitney_u(ys, xs)
            assert ux + uy == pytest.approx(len(xs) * len(ys))

    def test_swap_invariant_p(self):
        rng = random.Random(9)
        for _ in range(30):
            xs = [rng.random() for _ in range(6)]
            ys = [rng.random() for _ in range(5)]
            assert mann_whitney_u(xs, ys)[1] == pytest.approx(mann_whitney_u(ys, xs)[1], abs=1e-12)

    def test_monotone_transform_invariant(self):
        rng = random.Random(13)
        xs = [rng.random() for _ in range(10)]
        ys = [rng.random() for _ in range(12)]
        base = mann_whitney_u(xs, ys)
        transformed = mann_whitney_u([math.exp(5 * x) for x in xs], [math.exp(5 * y) for y in ys])
        assert base == pytest.approx(transformed, abs=1e-12)

    def test_exact_matches_permutation_oracle(self):
        rng = random.Random(21)
        for _ in range(20):
            n, m = rng.randint(2, 5), rng.randint(2, 5)
            vals = rng.sample(range(1000), n + m)
            xs, ys = vals[:n], vals[n:]
            _, p = mann_whitney_u(xs, ys)
            assert p == pytest.approx(mann_whitney_exact_p(xs, ys), abs=1e-12)

    def test_normal_approx_near_permutation_truth(self):
        rng = random.Random(77)
        checked = 0
        while checked < 50:
            n, m = rng.randint(5, 7), rng.randint(6, 7)
            if n + m <= 12:
                continue
            vals = rng.sample(range(10_000), n + m)
            xs, ys = vals[:n], vals[n:]
            _, p = mann_whitney_u(xs, ys)
            assert abs(p - mann_whitney_exact_p(xs, ys)) < 0.02
            checked += 1

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            mann_whitney_u([], [1.0])


class TestSyllables:
    @pytest.mark.parametrize(
        "word,count",
        [
            ("cat", 1),
            ("unwell", 2),
            ("table", 2),
            ("cake", 1),
            ("anxiety", 3),
            ("dizzy", 2),
            ("zzz", 1),
            ("see", 1),
            ("nausea", 2),
            ("ADE", 1),
        ],
    )
    def test_heuristic(self, word, count):
        assert syllable_count(word) == count

    def test_non_alphabetic(self):
        assert syllable_count("1234") == 1


class TestReadability:
    def test_cat_fixture(self):
        stats = readability("The cat sat on the mat.")
        assert stats.flesch == pytest.approx(116.145, abs=1e-3)
        assert stats.ari == pytest.approx(4.71 * (17 / 6) + 0.5 * 6 - 21.43, abs=1e-3)
        assert stats.dale_chall == pytest.approx(0.2976, abs=1e-3)
        assert stats.mean_syllables_per_word == pytest.approx(1.0)
        assert stats.mean_char_length == pytest.approx(17 / 6)

    def test_difficult_words_penalty(self):
        familiar = frozenset({"the"})
        easy = readability("the the the the.", familiar)
        hard = readability("tachycardia bradycardia arrhythmia.", familiar)
        assert hard.dale_chall > easy.dale_chall + 3.6365

    def test_unpronounceable_token(self):
        stats = readability("zzz")
        assert math.isfinite(stats.flesch) and math.isfinite(stats.ari)
        assert stats.mean_syllables_per_word == 1.0

    def test_no_words_rejected(self):
        with pytest.raises(ValueError):
            readability("... !!!")

    def test_missing_familiar_list(self, tmp_path):
        with pytest.raises(ConfigError):
            load_familiar_words(tmp_path / "absent.txt")

    def test_familiar_list_from_path(self, tmp_path):
        f = tmp_path / "words.txt"
        f.write_text("alpha\nbeta\n")
        assert load_familiar_words(f) == frozenset({"alpha", "beta"})


class TestPredictionTextStats:
    def test_single_entity_std_zero(self):
        stats = prediction_text_stats(["bad headache"])
        for mean, std in stats.values():
            assert std == 0.0
            assert math.isfinite(mean)

    def test_mean_char_length(self):
        stats = prediction_text_stats(["achy", "tremor"])
        assert stats["mean_char_length"][0] == pytest.approx(5.0)

    def test_ten_entity_fixture_matches_recompute(self):
        surfaces = [
            "heightened anxiety levels",
            "feeling unwell",
            "dizzy",
            "loss of concentration",
            "short term memory affected",
            "weakness in leg muscles",
            "numb",
            "brain is melting",
            "fatigue",
            "lost tons of weight",
        ]
        familiar = load_familiar_words()
        stats = prediction_text_stats(surfaces, familiar)
        # independent spreadsheet-style recomputation
        per_entity = [readability(s, familiar) for s in surfaces]
        for metric, (mean, std) in stats.items():
            vals = [getattr(t, metric) for t in per_entity]
            assert mean == pytest.approx(statistics.fmean(vals), abs=1e-12)
            assert std == pytest.approx(statistics.stdev(vals), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            prediction_text_stats([])


class TestPredictionsFile:
    def test_round_trip(self, tmp_path):
        preds = {
            "a": [(CharSpan(6, 31), "heightened anxiety levels")],
            "b": [],
        }
        path = tmp_path / "preds.jsonl"
        write_predictions(path, preds)
        again = load_predictions(path)
        assert again == preds
