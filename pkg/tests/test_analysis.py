import numpy as np
import pytest

from shiftbench.analysis import (
    ablate,
    average_ranks,
    build_design,
    fit_gam,
    join_records,
    preference_curve,
    spearman,
)


def synthetic_records(n=600, seed=0, informative="word", noise_pred="token",
                      backend="test-lm", shift="HNPS", sigma=0.1):
    """Records whose response depends only on the informative predictor."""
    rng = np.random.default_rng(seed)
    verbs = ["give", "send", "offer", "hand"]
    records = []
    for i in range(n):
        x_info = rng.uniform(0.2, 5.0)
        x_noise = rng.uniform(0.2, 5.0)
        y = np.sin(1.5 * x_info) - 0.4 * x_info + rng.normal(0, sigma)
        records.append({
            "pair_id": f"p{i}",
            "backend_id": backend,
            "shift_type": shift,
            "verb": verbs[i % len(verbs)],
            "m_preference": y,
            "ratios": {informative: x_info, noise_pred: x_noise},
        })
    return records


def test_build_design_shapes():
    records = synthetic_records(200)
    design = build_design(records, ["word", "token"], basis_size=10)
    names = [b.name for b in design.blocks]
    assert names == ["intercept", "s(word)", "s(token)", "group_intercept", "group_slope"]
    assert design.X.shape == (200, 1 + 10 + 10 + 4 + 4)


def test_build_design_missing_predictor_named():
    records = synthetic_records(50)
    with pytest.raises(ValueError, match="modifier"):
        build_design(records, ["word", "modifier"])


def test_build_design_constant_predictor_named():
    records = synthetic_records(50)
    for rec in records:
        rec["ratios"]["word"] = 2.0
    with pytest.raises(ValueError, match="word"):
        build_design(records, ["word", "token"])


def test_single_verb_collapses_random_effects():
    records = synthetic_records(80)
    for rec in records:
        rec["verb"] = "give"
    design = build_design(records, ["word", "token"])
    assert [b.name for b in design.blocks] == ["intercept", "s(word)", "s(token)"]


def test_fit_gam_on_informative_predictor():
    records = synthetic_records(500)
    fit = fit_gam(build_design(records, ["word", "token"]))
    assert fit.r_squared > 0.9


def test_ablation_separates_informative_from_noise():
    records = synthetic_records(800, sigma=0.05)
    table = ablate(records, ["word", "token"])
    assert len(table.rows) == 1
    row = table.rows[0]
    assert (row.backend_id, row.shift_type, row.n) == ("test-lm", "HNPS", 800)
    assert row.full_r2 - row.ablated["word"] > 0.2
    assert abs(row.full_r2 - row.ablated["token"]) < 0.02


def test_ablation_on_duplicated_predictor_is_flat():
    records = synthetic_records(600, sigma=0.05)
    for rec in records:
        rec["ratios"]["twin"] = rec["ratios"]["word"]
    table = ablate(records, ["word", "twin"])
    row = table.rows[0]
    assert abs(row.full_r2 - row.ablated["word"]) < 0.02
    assert abs(row.full_r2 - row.ablated["twin"]) < 0.02


def test_ablation_errors_stay_per_cell():
    records = synthetic_records(300)
    half = len(records) // 2
    for rec in records[:half]:
        rec["backend_id"] = "other-lm"
        rec["ratios"].pop("token")  # this group cannot fit the token predictor
    table = ablate(records, ["word", "token"])
    by_backend = {row.backend_id: row for row in table.rows}
    assert by_backend["other-lm"].full_r2 is None
    assert "full" in by_backend["other-lm"].errors
    assert by_backend["other-lm"].ablated["token"] is not None  # token dropped: fits fine
    assert by_backend["test-lm"].full_r2 is not None
    assert not by_backend["test-lm"].errors


def test_ablation_requires_two_predictors():
    with pytest.raises(ValueError):
        ablate(synthetic_records(50), ["word"])


def test_ablation_tsv_shape():
    table = ablate(synthetic_records(300), ["word", "token"])
    lines = table.to_tsv().strip().splitlines()
    assert lines[0].split("\t") == ["backend", "shift_type", "n", "full", "drop_word", "drop_token"]
    assert len(lines) == 2


def test_curve_flat_for_constant_preference():
    records = synthetic_records(100)
    for rec in records:
        rec["m_preference"] = 1.25
    curve = preference_curve(records, "word", bins=5)
    assert all(pt.mean == pytest.approx(1.25) for pt in curve)


def test_curve_empty_input():
    assert preference_curve([], "word") == []


def test_curve_omits_empty_bins():
    records = synthetic_records(40)
    for i, rec in enumerate(records):
        rec["ratios"]["word"] = 0.5 if i % 2 else 4.5  # leave the middle empty
    curve = preference_curve(records, "word", bins=8)
    assert len(curve) == 2
    assert sum(pt.count for pt in curve) == 40


def test_curve_bin_means_reproduce_global_mean():
    records = synthetic_records(500, seed=3)
    curve = preference_curve(records, "word", bins=12)
    total = sum(pt.count for pt in curve)
    weighted = sum(pt.mean * pt.count for pt in curve) / total
    global_mean = np.mean([rec["m_preference"] for rec in records])
    assert total == 500
    assert weighted == pytest.approx(global_mean, abs=1e-9)


def test_spearman_perfect_monotone():
    assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def brute_force_ranks(values):
    """O(n^2) average-rank oracle."""
    out = []
    for v in values:
        below = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        out.append(below + (equal + 1) / 2)
    return out


def test_average_ranks_match_brute_force():
    cases = [
        [3.0, 1.0, 4.0, 1.0, 5.0, 9.0],
        [2.0, 2.0, 2.0, 1.0, 3.0, 3.0],
        [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        [7.0, 7.0, 7.0, 7.0, 1.0, 2.0],
    ]
    for values in cases:
        assert list(average_ranks(values)) == brute_force_ranks(values)


def test_spearman_with_ties_matches_oracle():
    x = [1.0, 2.0, 2.0, 3.0, 4.0, 4.0]
    y = [10.0, 30.0, 20.0, 20.0, 50.0, 40.0]
    rx, ry = brute_force_ranks(x), brute_force_ranks(y)
    expected = np.corrcoef(rx, ry)[0, 1]
    assert spearman(x, y) == pytest.approx(expected, abs=1e-12)


def test_spearman_invariant_under_monotone_transform():
    rng = np.random.default_rng(5)
    x = rng.uniform(1, 10, 30)
    y = rng.uniform(1, 10, 30)
    base = spearman(x, y)
    assert spearman(np.exp(x), y) == pytest.approx(base, abs=1e-12)
    assert spearman(x, y**3) == pytest.approx(base, abs=1e-12)


def test_spearman_errors():
    with pytest.raises(ValueError):
        spearman([1, 2], [3, 4])
    with pytest.raises(ValueError):
        spearman([1, 2, 3], [4, 5])
    with pytest.raises(ValueError):
        spearman([1, 1, 1], [1, 2, 3])


def test_join_records_matches_on_pair_id(lexicon):
    from shiftbench.generator import GenerationPlan, expand
    from shiftbench.ngram import train_ngram
    from shiftbench.scoring import preference
    from shiftbench.weights import annotate_pair

    pairs = list(expand(lexicon, GenerationPlan.default("PM", 1)))[:20]
    for p in pairs:
        annotate_pair(p)
    model = train_ngram([p.unshifted for p in pairs], order=2)
    prefs = [preference(model, p) for p in pairs]
    rows = join_records(pairs, prefs)
    assert len(rows) == 20
    assert rows[0]["shift_type"] == "PM"
    assert rows[0]["ratios"] == pairs[0].ratios

    rows = join_records(pairs[:5], prefs)
    assert len(rows) == 5
