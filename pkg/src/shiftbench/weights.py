"""Constituent weight measures and per-pair relative-weight ratios.

Four measures: word length (whitespace words), syllable weight (heuristic
counter summed over words), token length (per scoring-backend tokenizer),
and modifier weight (modifier count + 1, synthetic data only). Every
analysis downstream runs on the ratio of the first constituent's weight to
the second's, both taken in unshifted order.
"""

from dataclasses import dataclass

from .text import word_tokens

VOWELS = set("aeiouy")


def word_length(text):
    """Number of word tokens (edge punctuation stripped, non-alphabetic dropped)."""
    if not text or not text.strip():
        raise ValueError("constituent text is empty")
    return len(word_tokens(text))


def syllable_count(word):
    """Heuristic syllable count for a single word.

    Counts maximal vowel groups (a e i o u y, with y consonantal
    word-initially), drops a terminal silent "e" unless the word ends in
    consonant + "le", and clamps to a minimum of one syllable. Tokens with
    no alphabetic characters count zero.
    """
    word = word.lower()
    if not any(c.isalpha() for c in word):
        return 0
    groups = 0
    prev_vowel = False
    for i, c in enumerate(word):
        is_vowel = c in VOWELS and not (c == "y" and i == 0)
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    if len(word) > 1 and word.endswith("e"):
        if word.endswith("le") and len(word) > 2 and word[-3] not in VOWELS:
            pass  # syllabic -le: "little", "table"
        elif word[-2] not in VOWELS:
            groups -= 1  # silent e: "large", "hope"
    return max(1, groups)


def syllable_weight(text):
    """Total syllables across the words of a constituent."""
    if not text or not text.strip():
        raise ValueError("constituent text is empty")
    return sum(syllable_count(w) for w in word_tokens(text))


def token_length(text, tokenizer):
    """Number of tokens a backend assigns to the text in isolation.

    Measured with a single leading space so subword tokenizers see the
    in-sentence form of the first word.
    """
    return len(tokenizer.tokenize(" " + text))


@dataclass(frozen=True)
class WeightProfile:
    word_length: int
    syllable_weight: int
    token_length: int | None = None
    modifier_weight: int | None = None

    def as_dict(self):
        d = {"word": self.word_length, "syllable": self.syllable_weight}
        if self.token_length is not None:
            d["token"] = self.token_length
        if self.modifier_weight is not None:
            d["modifier"] = self.modifier_weight
        return d


def profile(text, tokenizer=None, modifier_weight=None):
    return WeightProfile(
        word_length=word_length(text),
        syllable_weight=syllable_weight(text),
        token_length=token_length(text, tokenizer) if tokenizer is not None else None,
        modifier_weight=modifier_weight,
    )


def ratios(profile_a, profile_b):
    """Per-metric weight ratio of constituent A to constituent B.

    Metrics missing on either side are omitted. A zero weight on either
    side is an upstream data error.
    """
    a, b = profile_a.as_dict(), profile_b.as_dict()
    out = {}
    for metric in a:
        if metric not in b:
            continue
        if a[metric] <= 0 or b[metric] <= 0:
            raise ValueError(f"non-positive {metric} weight: {a[metric]}:{b[metric]}")
        out[metric] = a[metric] / b[metric]
    return out


def annotate_pair(pair, tokenizer=None):
    """Attach weight profiles and ratios to a pair, in place.

    Modifier weights come from generator metadata and exist only for
    synthetic pairs. The tokenizer, when given, must be the scoring
    backend's own.
    """
    const_a, const_b = pair.constituents
    prof_a = profile(const_a.text, tokenizer, pair.modifier_weight_a)
    prof_b = profile(const_b.text, tokenizer, pair.modifier_weight_b)
    pair.weights_a = prof_a.as_dict()
    pair.weights_b = prof_b.as_dict()
    pair.ratios = ratios(prof_a, prof_b)
    if tokenizer is not None:
        pair.weights_a["tokenizer"] = getattr(tokenizer, "backend_id", "unknown")
        pair.weights_b["tokenizer"] = getattr(tokenizer, "backend_id", "unknown")
    return pair
