"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (visible with ``pytest -s`` or in failure output)."""

import json
import statistics
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from shiftbench.analysis import ablate, join_records, preference_curve, spearman
from shiftbench.gam import SplineGAM, build_design, fit_design, objective_gradient, penalized_objective
from shiftbench.generator import GenerationPlan, expand
from shiftbench.ngram import train_ngram
from shiftbench.pairs import SentencePair
from shiftbench.scoring import preference, score_sequence
from shiftbench.study import StudyStore, load_attention_checks
from shiftbench.treebank import match_shift_pattern, realize_pair
from shiftbench.weights import profile, ratios, syllable_count, syllable_weight

from tests.test_ngram import CORPUS, brute_force_chain_rule
from tests.test_study import make_pool
from tests.test_treebank import FIGURE1, GOLD, all_matches


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPT] {name}: FAIL", file=sys.__stdout__, flush=True)
        raise
    print(f"[ACCEPT] {name}: PASS", file=sys.__stdout__, flush=True)


def test_weight_ratio_micro_examples():
    with criterion("weight-ratio micro-examples"):
        short = profile("with her grandmother")
        garden = profile("around the garden")
        long_ = profile("around the decorated entryway garden with the large fountain")
        same = ratios(short, garden)
        assert same["word"] == 1
        assert same["syllable"] == 1
        heavy = ratios(short, long_)
        assert heavy["word"] == 3 / 9
        assert heavy["syllable"] == 5 / 17


def test_syllable_heuristic(syllable_oracle):
    with criterion("syllable heuristic"):
        assert syllable_weight(
            "around the decorated entryway garden with the large fountain") == 17
        assert syllable_weight("with her grandmother") == 5
        exact = sum(1 for word, n in syllable_oracle if syllable_count(word) == n)
        assert exact / len(syllable_oracle) >= 0.90


def test_figure1_realizations(mini_treebank):
    with criterion("Figure 1 realization"):
        for (idx, shift), expected in FIGURE1.items():
            pair = realize_pair(match_shift_pattern(mini_treebank[idx], shift)[0])
            assert (pair.unshifted, pair.shifted) == expected


def test_miner_oracle(mini_treebank):
    with criterion("miner oracle (precision/recall)"):
        for shift, gold in GOLD.items():
            found = all_matches(mini_treebank, shift)
            assert found == gold, f"{shift}: matches diverge from hand labels"


def test_scoring_oracle(lexicon):
    with criterion("scoring oracle"):
        start = time.monotonic()
        model = train_ngram(CORPUS, order=2, delta=1.0)
        for text in CORPUS:
            expected = brute_force_chain_rule(CORPUS, 2, 1.0, text)
            assert abs(score_sequence(model, text).m_score - expected) <= 1e-9

        pairs = list(expand(lexicon, GenerationPlan.default("HNPS", 6)))[:1000]
        assert len(pairs) == 1000
        backend = train_ngram([p.unshifted for p in pairs[:200]], order=2, delta=0.5)
        for pair in pairs:
            swapped = SentencePair(
                id=pair.id, shift_type=pair.shift_type, unshifted=pair.shifted,
                shifted=pair.unshifted, verb=pair.verb, source=pair.source,
                constituents=pair.constituents,
            )
            assert preference(backend, swapped).m_preference == \
                -preference(backend, pair).m_preference
        assert time.monotonic() - start < 5


def test_end_to_end_trend(lexicon):
    with criterion("end-to-end preference trend"):
        start = time.monotonic()
        pairs = list(expand(lexicon, GenerationPlan.default("HNPS", 6)))
        assert len(pairs) >= 1000
        from shiftbench.weights import annotate_pair

        corpus = []
        for pair in pairs:
            annotate_pair(pair)
            ratio = pair.ratios["syllable"]
            heavy_last = round(16 * ratio / (1 + ratio))
            corpus += [pair.shifted] * heavy_last + [pair.unshifted] * (16 - heavy_last)
        model = train_ngram(corpus, order=2, delta=0.5)
        records = join_records(pairs, [preference(model, p) for p in pairs])
        curve = preference_curve(records, "syllable", bins=12)
        rho = spearman([pt.center for pt in curve], [pt.mean for pt in curve])
        assert rho < -0.8
        assert time.monotonic() - start < 60


def test_gam_recovery():
    with criterion("GAM recovery"):
        start = time.monotonic()
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 1, 500)
        y = np.sin(2 * np.pi * x) + rng.normal(0, 0.05, 500)
        model = SplineGAM(n_bases=10).fit(x[:, None], y)
        assert model.r_squared_ > 0.95

        design = build_design(x[:80, None], y[:80], n_bases=6)
        fit = fit_design(design)
        beta = fit.coef + 0.05
        analytic = objective_gradient(design, fit, beta)
        h = 1e-5
        numeric = np.zeros_like(beta)
        for i in range(len(beta)):
            step = np.zeros_like(beta)
            step[i] = h
            numeric[i] = (penalized_objective(design, fit, beta + step)
                          - penalized_objective(design, fit, beta - step)) / (2 * h)
        assert np.linalg.norm(analytic - numeric) <= 1e-6 * np.linalg.norm(analytic)
        scale = np.linalg.norm(design.X.T @ design.y)
        assert np.linalg.norm(objective_gradient(design, fit)) <= 1e-6 * scale
        assert time.monotonic() - start < 10


def test_ablation_discrimination():
    with criterion("ablation discrimination"):
        start = time.monotonic()
        rng = np.random.default_rng(1)
        verbs = ["give", "send", "offer"]
        records = []
        for i in range(800):
            x_a = rng.uniform(0.2, 5.0)
            x_b = rng.uniform(0.2, 5.0)
            y = np.sin(1.5 * x_a) - 0.4 * x_a + rng.normal(0, 0.05)
            records.append({
                "pair_id": f"p{i}", "backend_id": "lm", "shift_type": "HNPS",
                "verb": verbs[i % 3], "m_preference": y,
                "ratios": {"word": x_a, "token": x_b},
            })
        row = ablate(records, ["word", "token"]).rows[0]
        assert row.full_r2 - row.ablated["word"] > 0.2
        assert abs(row.full_r2 - row.ablated["token"]) < 0.02
        assert time.monotonic() - start < 30


def test_judgment_aggregation():
    with criterion("judgment aggregation"):
        checks = load_attention_checks()
        store = StudyStore(make_pool(25), attention_checks=checks, attention_count=2)
        raw = [1, 7, 1, 7]
        for k, participant in enumerate(["a", "b", "c", "d"]):
            assignment = store.create_assignment(participant)
            for item in assignment.items:
                if item.is_attention_check:
                    rating = 1 if item.presentation_order == "unshifted_first" else 7
                elif item.pair_id == "pair-0":
                    rating = raw[k] if item.presentation_order == "unshifted_first" \
                        else 8 - raw[k]
                else:
                    rating = 4
                store.submit_judgment({"participant_id": participant,
                                       "pair_id": item.pair_id, "rating": rating})
        # a participant who fails every attention check contributes nothing
        sloppy = store.create_assignment("sloppy")
        for item in sloppy.items:
            if item.is_attention_check:
                rating = 7 if item.presentation_order == "unshifted_first" else 1
            else:
                rating = 1
            store.submit_judgment({"participant_id": "sloppy",
                                   "pair_id": item.pair_id, "rating": rating})
        aggs = {a.pair_id: a for a in store.aggregates()}
        split = aggs["pair-0"]
        assert split.n == 4  # sloppy's rating is gone
        assert split.stddev == pytest.approx(statistics.stdev(raw))
        assert split.excluded and split.reason == "stddev"
        assert all(a.n == 4 for a in aggs.values())


def test_aggregation_replay_identical(tmp_path):
    with criterion("aggregation log replay"):
        data_dir = tmp_path / "study"
        store = StudyStore(make_pool(30), attention_checks=load_attention_checks(),
                           data_dir=data_dir)
        for participant in ("a", "b", "c"):
            for item in store.create_assignment(participant).items:
                rating = 2 if item.presentation_order == "unshifted_first" else 6
                store.submit_judgment({"participant_id": participant,
                                       "pair_id": item.pair_id, "rating": rating})
        before = json.dumps([a.to_record() for a in store.aggregates()], sort_keys=True)
        replayed = StudyStore(make_pool(30), attention_checks=load_attention_checks(),
                              data_dir=data_dir)
        after = json.dumps([a.to_record() for a in replayed.aggregates()], sort_keys=True)
        assert before == after


def test_spearman_criterion():
    with criterion("spearman"):
        assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0, abs=1e-12)
        assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)
        from tests.test_analysis import brute_force_ranks

        x = [2.0, 2.0, 5.0, 1.0, 5.0, 3.0]
        y = [4.0, 1.0, 1.0, 2.0, 6.0, 6.0]
        expected = np.corrcoef(brute_force_ranks(x), brute_force_ranks(y))[0, 1]
        assert spearman(x, y) == pytest.approx(expected, abs=1e-12)
