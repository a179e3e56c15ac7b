import json
from fractions import Fraction

import numpy as np
import pytest

from bechdelkit.metrics import (Dialogue, DialogueSet, bechdel_scores,
                                dialogue_imbalance, dialogue_from_json,
                                dialogue_to_json, gender_independence,
                                make_dialogue, metric_report, read_dialogues,
                                select_count, write_dialogues)

from conftest import (as_fraction, brute_metrics, brute_select_count,
                      random_dialogue_set, random_dialogues)


def ds_of(*tuples):
    return DialogueSet(Dialogue(g1=t[0], g2=t[1], m=t[2], f=t[3])
                       for t in tuples)


class TestSelectCount:
    def test_pattern_examples(self):
        ds = ds_of(("F", "F", 0, 0), ("F", "F", 1, 0), ("M", "M", 0, 0))
        assert select_count(ds, ("F", "F", "0", "*")) == 1
        assert select_count(ds, ("*", "*", "*", "*")) == 3

    def test_unordered_matches_either_orientation(self):
        ds = ds_of(("F", "M", 0, 0), ("M", "F", 1, 1))
        assert select_count(ds, ("F", "M", "*", "*")) == 1
        assert select_count(ds, ("F", "M", "*", "*"), unordered=True) == 2

    def test_unordered_counts_each_dialogue_once(self):
        ds = ds_of(("F", "F", 0, 0))
        assert select_count(ds, ("F", "F", "*", "*"), unordered=True) == 1

    def test_bad_symbols_rejected(self):
        ds = ds_of(("F", "F", 0, 0))
        with pytest.raises(ValueError):
            select_count(ds, ("X", "F", "0", "*"))
        with pytest.raises(ValueError):
            select_count(ds, ("F", "F", "2", "*"))

    def test_matches_brute_force_on_random_sets(self):
        rng = np.random.default_rng(42)
        symbols_g = ["M", "F", "U", "*"]
        symbols_r = ["0", "1", "*"]
        for _ in range(50):
            ds = random_dialogue_set(rng, max_n=500)
            for _ in range(50):
                pattern = (rng.choice(symbols_g), rng.choice(symbols_g),
                           rng.choice(symbols_r), rng.choice(symbols_r))
                unordered = bool(rng.integers(0, 2))
                assert select_count(ds, pattern, unordered) == \
                    brute_select_count(ds.dialogues, pattern, unordered)

    def test_cache_equals_brute_recount(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            ds = random_dialogue_set(rng, max_n=300)
            recount = {}
            for d in ds:
                key = (d.g1, d.g2, d.m, d.f)
                recount[key] = recount.get(key, 0) + 1
            assert dict(ds.pattern_counts) == recount


class TestBechdelScores:
    def test_single_clean_female_dialogue(self):
        b_f, b_m = bechdel_scores(ds_of(("F", "F", 0, 0)))
        assert b_f == 1.0 and b_m == 0.0

    def test_empty_set_is_undefined_not_zero(self):
        b_f, b_m = bechdel_scores(DialogueSet([]))
        assert b_f is None and b_m is None

    def test_city_proportions_fixture(self):
        # 6/100 clean F-F and 36/100 clean M-M
        tuples = ([("F", "F", 0, 0)] * 6 + [("F", "F", 1, 0)] * 4
                  + [("M", "M", 0, 0)] * 30 + [("M", "M", 1, 0)] * 6
                  + [("M", "M", 0, 1)] * 24 + [("F", "M", 1, 1)] * 20
                  + [("M", "U", 0, 0)] * 6 + [("U", "U", 0, 0)] * 4)
        b_f, b_m = bechdel_scores(ds_of(*tuples))
        assert b_f == pytest.approx(0.06, abs=1e-12)
        assert b_m == pytest.approx(0.36, abs=1e-12)


class TestDialogueImbalance:
    def test_half_cross(self):
        x_f, x_m = dialogue_imbalance(ds_of(("F", "M", 0, 0), ("F", "F", 0, 0)))
        assert x_f == 0.5

    def test_only_male_dialogues(self):
        x_f, x_m = dialogue_imbalance(ds_of(("M", "M", 0, 0)))
        assert x_m == 1.0 and x_f is None

    def test_unknown_gender_counts_in_denominator(self):
        ds = ds_of(("F", "M", 0, 0), ("M", "M", 0, 0), ("M", "U", 0, 0))
        x_f, x_m = dialogue_imbalance(ds)
        assert x_m == pytest.approx(1 / 3)


class TestGenderIndependence:
    def test_ratio_value(self):
        tuples = [("F", "F", 0, 0)] * 4 + [("F", "F", 1, 0)] * 6
        res = gender_independence(ds_of(*tuples), min_aligned=1)
        assert res.i_f == pytest.approx(0.4)
        assert res.ci_f is not None

    def test_below_threshold_undefined(self):
        tuples = [("F", "F", 0, 0)] * 49
        res = gender_independence(ds_of(*tuples), min_aligned=50)
        assert res.i_f is None
        assert "i_f" in res.reasons

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            ds = random_dialogue_set(rng, max_n=400)
            res = gender_independence(ds, min_aligned=1)
            oracle = brute_metrics(ds.dialogues)
            for got, key in ((res.i_f, "i_f"), (res.i_m, "i_m")):
                want = as_fraction(oracle[key])
                if want is None:
                    assert got is None
                else:
                    assert got == pytest.approx(float(want), abs=0)


class TestInvariants:
    def test_decomposition_identity_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            ds = random_dialogue_set(rng, max_n=300)
            rep = metric_report(ds, min_aligned=1)
            c = rep.counts
            if rep.b_f is not None and rep.i_f is not None:
                assert Fraction(c.n_ff_m0, c.n_total) == \
                    Fraction(c.n_ff_m0, c.n_ff) * Fraction(c.n_ff, c.n_total)
                assert rep.b_f == pytest.approx(rep.i_f * c.n_ff / c.n_total,
                                                rel=1e-12)
            if rep.b_m is not None and rep.i_m is not None:
                assert rep.b_m == pytest.approx(rep.i_m * c.n_mm / c.n_total,
                                                rel=1e-12)

    def test_gender_swap_maps_metrics(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            ds = random_dialogue_set(rng, max_n=300)
            swapped = DialogueSet(d.swapped_genders() for d in ds)
            b_f, b_m = bechdel_scores(ds)
            sb_f, sb_m = bechdel_scores(swapped)
            assert b_f == sb_m and b_m == sb_f
            r = gender_independence(ds, min_aligned=1)
            rs = gender_independence(swapped, min_aligned=1)
            assert r.i_f == rs.i_m and r.i_m == rs.i_f

    def test_gender_swap_imbalance_complement_without_unknowns(self):
        rng = np.random.default_rng(13)
        genders = ["M", "F"]
        for _ in range(100):
            n = int(rng.integers(1, 200))
            ds = DialogueSet(
                Dialogue(g1=str(rng.choice(genders)), g2=str(rng.choice(genders)),
                         m=int(rng.integers(0, 2)), f=int(rng.integers(0, 2)))
                for _ in range(n))
            swapped = DialogueSet(d.swapped_genders() for d in ds)
            x_f, x_m = dialogue_imbalance(ds)
            sx_f, sx_m = dialogue_imbalance(swapped)
            if sx_f is not None and x_m is not None:
                assert sx_f == pytest.approx(1.0 - x_m, abs=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(14)
        dialogues = random_dialogues(rng, 200)
        ds = DialogueSet(dialogues)
        perm = list(dialogues)
        rng.shuffle(perm)
        shuffled = DialogueSet(perm)
        assert bechdel_scores(ds) == bechdel_scores(shuffled)
        assert dialogue_imbalance(ds) == dialogue_imbalance(shuffled)

    def test_defined_ratios_in_unit_interval(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            rep = metric_report(random_dialogue_set(rng, 200), min_aligned=1)
            for value in (rep.b_f, rep.b_m, rep.x_f, rep.x_m, rep.i_f, rep.i_m):
                if value is not None:
                    assert 0.0 <= value <= 1.0
            if rep.asymmetry is not None:
                assert -1.0 <= rep.asymmetry <= 1.0


class TestDialogue:
    def test_domain_validation(self):
        with pytest.raises(ValueError):
            Dialogue(g1="X", g2="F", m=0, f=0)
        with pytest.raises(ValueError):
            Dialogue(g1="F", g2="F", m=2, f=0)

    def test_make_dialogue_uses_detector(self, tiny_reflex):
        d = make_dialogue("F", "F", "she saw mike", tiny_reflex.detect)
        assert (d.m, d.f) == (1, 1)
        d2 = make_dialogue("M", "M", "nothing gendered", tiny_reflex.detect)
        assert (d2.m, d2.f) == (0, 0)

    def test_json_round_trip(self, tmp_path):
        d = Dialogue(g1="F", g2="M", m=1, f=0,
                     participant_ids=("a", "b"), source_ids=("1", "2"),
                     origin="stream", ordered=False)
        assert dialogue_from_json(dialogue_to_json(d)) == d
        ds = ds_of(("F", "F", 0, 0), ("M", "U", 1, 1))
        path = tmp_path / "d.jsonl"
        write_dialogues(path, ds)
        assert read_dialogues(path) == ds

    def test_report_serialization(self):
        rep = metric_report(ds_of(("F", "F", 0, 0), ("M", "M", 0, 0)),
                            min_aligned=1)
        obj = json.loads(rep.to_json())
        assert obj["b_f"] == 0.5
        assert obj["counts"]["n_total"] == 2
