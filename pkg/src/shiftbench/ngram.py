"""Additively smoothed n-gram language model, the built-in scoring backend.

Serves as a deterministic desk-scale stand-in for a neural LM: it exposes
the same backend surface (tokenize + per-token log probabilities) and its
scores can be checked against a brute-force chain-rule computation.
"""

import hashlib
import math
from collections import Counter

from .text import scoring_tokens

BOS = "<s>"
UNK = "<unk>"


class NGramModel:
    """Word n-gram model with additive smoothing.

    Conditional probabilities are ``(count + delta) / (total + delta *
    (|V| + 1))`` over the seen vocabulary plus a single unknown class.
    Sentence-boundary events are counted during training (the terminal
    boundary folds into the unknown class, keeping every seen context's
    distribution normalized); scored sequences cover exactly the text's
    own tokens, so neither boundary marker contributes a scored term.
    """

    def __init__(self, order=2, delta=1.0):
        if order not in (1, 2, 3):
            raise ValueError("order must be 1, 2, or 3")
        if delta <= 0:
            raise ValueError("delta must be > 0")
        self.order = order
        self.delta = delta
        self.vocab = set()
        self.counts = {}
        self.totals = Counter()
        self._fitted = False
        self._digest = None

    def tokenize(self, text):
        return scoring_tokens(text)

    def fit(self, corpus):
        """Accumulate counts from an iterable of sentence strings."""
        if self._fitted:
            raise RuntimeError("model is immutable once fitted")
        hasher = hashlib.sha256()
        n_sentences = 0
        for sentence in corpus:
            tokens = self.tokenize(sentence)
            if not tokens:
                continue
            n_sentences += 1
            hasher.update(("\x1f".join(tokens) + "\n").encode())
            self.vocab.update(tokens)
            padded = [BOS] * (self.order - 1) + tokens + [UNK]
            for i in range(len(tokens) + 1):
                context = tuple(padded[i : i + self.order - 1])
                outcome = padded[i + self.order - 1]
                self.counts.setdefault(context, Counter())[outcome] += 1
                self.totals[context] += 1
        if n_sentences == 0:
            raise ValueError("training corpus is empty")
        self._digest = hasher.hexdigest()[:8]
        self._fitted = True
        return self

    @property
    def backend_id(self):
        if not self._fitted:
            raise RuntimeError("model not fitted")
        return f"ngram-o{self.order}-d{self.delta:g}-{self._digest}"

    def _class(self, token):
        return token if token in self.vocab else UNK

    def probability(self, context, token):
        """Smoothed P(token | context); context tokens are raw strings."""
        if not self._fitted:
            raise RuntimeError("model not fitted")
        ctx = tuple(context)
        count = self.counts.get(ctx, Counter())[self._class(token)]
        total = self.totals[ctx]
        return (count + self.delta) / (total + self.delta * (len(self.vocab) + 1))

    def context_distribution(self, context):
        """P(w | context) for every class (vocabulary + unknown)."""
        return {w: self.probability(context, w) for w in [*sorted(self.vocab), UNK]}

    def token_logprobs(self, text):
        tokens = self.tokenize(text)
        padded = [BOS] * (self.order - 1) + tokens
        logprobs = []
        for i, token in enumerate(tokens):
            context = tuple(padded[i : i + self.order - 1])
            logprobs.append(math.log(self.probability(context, token)))
        return tokens, logprobs


def train_ngram(corpus, order=2, delta=1.0):
    """Train an n-gram model over a corpus of sentences."""
    return NGramModel(order=order, delta=delta).fit(corpus)
