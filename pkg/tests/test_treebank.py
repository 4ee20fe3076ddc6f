import re

import pytest

from shiftbench.pairs import PairError
from shiftbench.text import detokenize, verb_lemma
from shiftbench.treebank import (
    ParseNode,
    PairQualityError,
    QualityFilter,
    TreebankParseError,
    match_shift_pattern,
    mine,
    parse_treebank,
    realize_pair,
)

# hand labels for the fixture: (tree index, constituent_a yield, constituent_b yield)
GOLD = {
    "HNPS": [
        (0, "the tall man selling water to marathon runners", "at the park"),
        (0, "water", "to marathon runners"),
        (4, "the man", "at the park"),
        (5, "the final report", "to the minister"),
        (12, "the mayor", "at city hall"),
        (16, "the documents she requested", "to the court"),
        (17, "``''", "in the filing"),
        (19, "the sprawling and badly aging industrial complex of old warehouses, "
             "rusty depots, wooden loading docks, tall cranes, concrete silos, "
             "small offices, metal sheds, open yards and broken fences",
         "near the harbor"),
    ],
    "PM": [
        (1, "up", "her question"),
        (6, "off", "the lights"),
        (7, "his jacket", "on"),
    ],
    "DA": [
        (2, "her", "a gift"),
        (8, "the students", "their essays"),
        (9, "the company", "a generous loan"),
    ],
    "MPP": [
        (3, "to the mall", "with my sister"),
        (10, "with the manager", "about the delay"),
        (11, "from the station", "to the hotel"),
        (14, "from the capital", "to the coast"),
        (18, "about the budget", "during the meeting"),
    ],
}


def all_matches(trees, shift):
    found = []
    for i, tree in enumerate(trees):
        for m in match_shift_pattern(tree, shift):
            found.append((i, detokenize(m.constituent_a.words()),
                          detokenize(m.constituent_b.words())))
    return found


def test_parse_tree_count(mini_treebank):
    assert len(mini_treebank) == 20


def test_print_parse_roundtrip(mini_treebank):
    for tree in mini_treebank:
        reparsed = parse_treebank(tree.to_string())
        assert len(reparsed) == 1
        assert reparsed[0] == tree


def test_roundtrip_matches_input_tokens(mini_treebank):
    source = (__import__("pathlib").Path(__file__).parent / "fixtures" / "mini_treebank.mrg").read_text()
    printed = "\n".join(t.to_string() for t in mini_treebank)
    tokenize = lambda s: re.findall(r"\(|\)|[^()\s]+", s)
    assert tokenize(printed) == tokenize(source)


def test_simple_parse():
    trees = parse_treebank("(S (NP (DT the) (NN dog)) (VP (VBD ran)))")
    assert len(trees) == 1
    assert trees[0].words() == ["the", "dog", "ran"]
    assert len(trees[0].children) == 2


def test_ptb_wrapper_unwrapped():
    trees = parse_treebank("( (S (NP (DT the) (NN dog)) (VP (VBD ran))) )")
    assert trees[0].label == "S"


def test_unbalanced_open_errors_at_end():
    source = "(S (NP (DT the)"
    with pytest.raises(TreebankParseError) as err:
        parse_treebank(source)
    assert err.value.offset == len(source)


def test_unbalanced_close_errors_with_offset():
    with pytest.raises(TreebankParseError) as err:
        parse_treebank("(S (NN dog)))")
    assert err.value.offset == 12


def test_empty_label_errors():
    with pytest.raises(TreebankParseError):
        parse_treebank("( (NP (DT the)) (VP (VBD ran)) )")
    with pytest.raises(TreebankParseError):
        parse_treebank("(S ())")


def test_mixed_children_error():
    with pytest.raises(TreebankParseError):
        parse_treebank("(NP (DT the) dog)")


def test_spans_cover_children(mini_treebank):
    def check(node):
        if node.is_terminal:
            return
        assert node.span == (node.children[0].span[0], node.children[-1].span[1])
        for a, b in zip(node.children, node.children[1:]):
            assert a.span[1] == b.span[0]
        for child in node.children:
            check(child)

    for tree in mini_treebank:
        check(tree)


def test_empty_categories_dropped_from_yield(mini_treebank):
    passive = mini_treebank[15]
    assert passive.contains_empty()
    assert "*-1" not in passive.words()
    assert detokenize(passive.words()) == "The man was met at the park."


def test_function_tags_stripped():
    node = ParseNode("NP-SBJ-1")
    assert node.base_label == "NP"
    assert ParseNode("-NONE-").base_label == "-NONE-"
    assert ParseNode("PP-LOC=2").base_label == "PP"


@pytest.mark.parametrize("shift", sorted(GOLD))
def test_matches_equal_hand_labels(mini_treebank, shift):
    assert all_matches(mini_treebank, shift) == GOLD[shift]


def test_matches_outermost_vp_first(mini_treebank):
    matches = match_shift_pattern(mini_treebank[0], "HNPS")
    assert len(matches) == 2
    outer, inner = matches
    assert outer.constituent_a.span[0] < inner.constituent_a.span[0]


def test_no_match_trees(mini_treebank):
    for shift in GOLD:
        assert match_shift_pattern(mini_treebank[13], shift) == []
        assert match_shift_pattern(mini_treebank[15], shift) == []


def test_match_schema_revalidation(mini_treebank):
    schemas = {"HNPS": {("NP", "PP")}, "PM": {("PRT", "NP"), ("NP", "PRT")},
               "DA": {("NP", "NP")}, "MPP": {("PP", "PP")}}
    for shift, allowed in schemas.items():
        for tree in mini_treebank:
            for m in match_shift_pattern(tree, shift):
                labels = (m.constituent_a.base_label, m.constituent_b.base_label)
                assert labels in allowed
                assert m.constituent_a.span[1] <= m.constituent_b.span[0]


FIGURE1 = {
    (0, "HNPS"): ("I met the tall man selling water to marathon runners at the park.",
                  "I met at the park the tall man selling water to marathon runners."),
    (1, "PM"): ("She looked up her question on her computer.",
                "She looked her question up on her computer."),
    (2, "DA"): ("He sent her a gift for her birthday.",
                "He sent a gift to her for her birthday."),
    (3, "MPP"): ("I went to the mall with my sister on Sunday.",
                 "I went with my sister to the mall on Sunday."),
}


@pytest.mark.parametrize("key", sorted(FIGURE1))
def test_realize_figure1_sentences(mini_treebank, key):
    idx, shift = key
    pair = realize_pair(match_shift_pattern(mini_treebank[idx], shift)[0])
    assert (pair.unshifted, pair.shifted) == FIGURE1[key]


def test_realize_simple_hnps(mini_treebank):
    pair = realize_pair(match_shift_pattern(mini_treebank[4], "HNPS")[0])
    assert pair.unshifted == "I met the man at the park."
    assert pair.shifted == "I met at the park the man."
    assert pair.verb == "meet"
    assert [c.text for c in pair.constituents] == ["the man", "at the park"]


def test_realize_pm_normalizes_particle_first(mini_treebank):
    pair = realize_pair(match_shift_pattern(mini_treebank[7], "PM")[0])
    assert pair.unshifted == "He put on his jacket before the show."
    assert pair.shifted == "He put his jacket on before the show."
    assert [c.role for c in pair.constituents] == ["PRT", "NP"]
    assert pair.constituents[0].text == "on"


def test_realize_da_rejects_to_recipient():
    tree = parse_treebank(
        "(S (NP (PRP He)) (VP (VBD sent) (NP (IN to) (NN town)) (NP (DT a) (NN gift))) (. .))"
    )[0]
    match = match_shift_pattern(tree, "DA")[0]
    with pytest.raises(PairQualityError):
        realize_pair(match)


def word_multiset(text):
    return sorted(w.strip(".,").lower() for w in text.split() if w.strip(".,"))


def test_yield_conservation(mini_treebank):
    for shift in GOLD:
        for tree in mini_treebank:
            for m in match_shift_pattern(tree, shift):
                try:
                    pair = realize_pair(m)
                except (PairQualityError, PairError):
                    continue
                u, s = word_multiset(pair.unshifted), word_multiset(pair.shifted)
                if shift == "DA":
                    assert sorted(u + ["to"]) == s
                else:
                    assert u == s


def test_quality_filter_rejects_embedded_trace(mini_treebank):
    match = match_shift_pattern(mini_treebank[16], "HNPS")[0]
    assert not QualityFilter().accepts(match)
    assert QualityFilter(reject_empty_categories=False).accepts(match)


def test_quality_filter_rejects_quote_only(mini_treebank):
    match = match_shift_pattern(mini_treebank[17], "HNPS")[0]
    assert not QualityFilter().accepts(match)


def test_quality_filter_rejects_long_constituent(mini_treebank):
    match = match_shift_pattern(mini_treebank[19], "HNPS")[0]
    assert not QualityFilter().accepts(match)
    assert QualityFilter(max_constituent_words=40).accepts(match)


def test_quality_filter_verb_allowlist(mini_treebank):
    match = match_shift_pattern(mini_treebank[4], "HNPS")[0]
    assert QualityFilter(verb_allowlist=frozenset({"meet"})).accepts(match)
    assert not QualityFilter(verb_allowlist=frozenset({"send"})).accepts(match)


def test_mine_deterministic_sample(mini_treebank):
    first = mine(mini_treebank, "HNPS", sample_size=3, rng_seed=7)
    second = mine(mini_treebank, "HNPS", sample_size=3, rng_seed=7)
    assert len(first) == 3
    assert [p.id for p in first] == [p.id for p in second]


def test_mine_returns_all_when_sample_exceeds_matches(mini_treebank):
    pairs = mine(mini_treebank, "MPP", sample_size=100, rng_seed=7)
    assert len(pairs) == 5


def test_mine_no_matches(mini_treebank):
    assert mine(mini_treebank[13:14], "DA", sample_size=10, rng_seed=7) == []


def test_mine_applies_quality_filters(mini_treebank):
    pairs = mine(mini_treebank, "HNPS", sample_size=100, rng_seed=7)
    # trees 16, 17, 19 carry filtered matches; tree 0 contributes two
    assert len(pairs) == 5
    texts = {p.unshifted for p in pairs}
    assert "The lawyer sent the documents she requested to the court." not in texts


def test_verb_lemma():
    assert verb_lemma("met") == "meet"
    assert verb_lemma("Sent") == "send"
    assert verb_lemma("looked") == "looked"
    assert verb_lemma("visited") == "visited"


def test_mined_record_field_order(mini_treebank):
    pair = mine(mini_treebank, "HNPS", sample_size=1, rng_seed=7)[0]
    assert list(pair.to_record()) == [
        "id", "shift_type", "unshifted", "shifted", "verb", "source", "constituents",
    ]
    assert list(pair.to_record()["constituents"][0]) == ["role", "text", "order_index"]


def test_annotate_mined_pair_has_no_modifier_ratio(mini_treebank):
    from shiftbench.weights import annotate_pair

    pair = mine(mini_treebank, "DA", sample_size=1, rng_seed=7)[0]
    annotate_pair(pair)
    assert set(pair.ratios) == {"word", "syllable"}
    assert "modifier" not in pair.weights_a
