"""Tokenization and detokenization helpers shared across the pipeline."""

import re
import string

_EDGE_PUNCT = string.punctuation
_NO_SPACE_BEFORE = {".", ",", ";", "?", "!", "n't"}


def detokenize(tokens):
    """Join tokens with single spaces.

    No space is inserted before sentence punctuation (``. , ; ? !``),
    before ``n't``, or before clitics starting with an apostrophe
    (``'s``, ``'re``, ...).
    """
    out = []
    for tok in tokens:
        if out and (tok in _NO_SPACE_BEFORE or tok.startswith("'")):
            out[-1] = out[-1] + tok
        else:
            out.append(tok)
    return " ".join(out)


def word_tokens(text):
    """Whitespace-delimited word tokens with edge punctuation stripped.

    Tokens without any alphabetic character (bare punctuation, numbers)
    are dropped; they carry no word or syllable weight.
    """
    words = []
    for raw in text.split():
        tok = raw.strip(_EDGE_PUNCT)
        if any(c.isalpha() for c in tok):
            words.append(tok)
    return words


_SCORING_TOKEN = re.compile(r"[\w']+|[^\w\s]")


def scoring_tokens(text):
    """Lowercased tokens for the built-in scoring backend.

    Words (with internal apostrophes) and individual punctuation marks
    are separate tokens, so sentence-final punctuation is scored.
    """
    return _SCORING_TOKEN.findall(text.lower())


# past-tense forms of common irregular verbs; regular verbs keep their
# lowercased surface form as the grouping key
_IRREGULAR_VERBS = {
    "met": "meet", "sent": "send", "went": "go", "gave": "give", "ran": "run",
    "took": "take", "threw": "throw", "sold": "sell", "bought": "buy",
    "brought": "bring", "told": "tell", "made": "make", "found": "find",
    "said": "say", "saw": "see", "drove": "drive", "spoke": "speak",
    "wrote": "write", "kept": "keep", "held": "hold", "left": "leave",
    "lost": "lose", "paid": "pay", "built": "build", "heard": "hear",
    "got": "get", "taught": "teach", "showed": "show", "slept": "sleep",
    "came": "come", "flew": "fly", "drew": "draw", "wore": "wear",
    "was": "be", "were": "be",
}


def verb_lemma(surface):
    low = surface.lower()
    return _IRREGULAR_VERBS.get(low, low)
