"""The minimal-pair data model and its JSON Lines serialization.

A :class:`SentencePair` is one unshifted/shifted minimal pair. Pairs are
produced by the generator (``source="synthetic"``) or the treebank miner
(``source="mined"``), annotated with weights, and consumed by scoring and
analysis. All pipeline stages exchange pairs as JSON Lines records.
"""

import json
from dataclasses import dataclass

SHIFT_TYPES = ("HNPS", "PM", "DA", "MPP")

# Constituent roles per shift type, in unshifted surface order.
ROLES = {
    "HNPS": ("NP", "PP"),
    "PM": ("PRT", "NP"),
    "DA": ("NP1", "NP2"),
    "MPP": ("PP1", "PP2"),
}


class PairError(ValueError):
    """A sentence pair violates its structural invariants."""


@dataclass(frozen=True)
class Constituent:
    role: str
    text: str
    order_index: int


@dataclass
class SentencePair:
    id: str
    shift_type: str
    unshifted: str
    shifted: str
    verb: str
    source: str
    constituents: tuple
    # synthetic-only metadata
    frame_id: str | None = None
    level_a: int | None = None
    level_b: int | None = None
    modifier_weight_a: int | None = None
    modifier_weight_b: int | None = None
    # weight annotations (added by the weigh stage)
    weights_a: dict | None = None
    weights_b: dict | None = None
    ratios: dict | None = None

    def validate(self):
        if self.shift_type not in SHIFT_TYPES:
            raise PairError(f"unknown shift type {self.shift_type!r}")
        if self.unshifted == self.shifted:
            raise PairError(f"pair {self.id}: unshifted and shifted texts are identical")
        if len(self.constituents) != 2:
            raise PairError(f"pair {self.id}: expected 2 constituents")
        expected = ROLES[self.shift_type]
        roles = tuple(c.role for c in self.constituents)
        if roles != expected:
            raise PairError(f"pair {self.id}: roles {roles} do not match schema {expected}")
        _check_word_conservation(self)
        return self

    def to_record(self):
        rec = {
            "id": self.id,
            "shift_type": self.shift_type,
            "unshifted": self.unshifted,
            "shifted": self.shifted,
            "verb": self.verb,
            "source": self.source,
            "constituents": [
                {"role": c.role, "text": c.text, "order_index": c.order_index}
                for c in self.constituents
            ],
        }
        for key in ("frame_id", "level_a", "level_b", "modifier_weight_a", "modifier_weight_b",
                    "weights_a", "weights_b", "ratios"):
            value = getattr(self, key)
            if value is not None:
                rec[key] = value
        return rec

    @classmethod
    def from_record(cls, rec):
        constituents = tuple(
            Constituent(c["role"], c["text"], c["order_index"]) for c in rec["constituents"]
        )
        return cls(
            id=rec["id"],
            shift_type=rec["shift_type"],
            unshifted=rec["unshifted"],
            shifted=rec["shifted"],
            verb=rec["verb"],
            source=rec["source"],
            constituents=constituents,
            frame_id=rec.get("frame_id"),
            level_a=rec.get("level_a"),
            level_b=rec.get("level_b"),
            modifier_weight_a=rec.get("modifier_weight_a"),
            modifier_weight_b=rec.get("modifier_weight_b"),
            weights_a=rec.get("weights_a"),
            weights_b=rec.get("weights_b"),
            ratios=rec.get("ratios"),
        )


def _word_multiset(text):
    words = []
    for raw in text.split():
        tok = raw.strip(".,;?!\"'`()").lower()
        if tok:
            words.append(tok)
    return sorted(words)


def _check_word_conservation(pair):
    """Both orders contain the same words; DA may insert exactly one "to"."""
    u = _word_multiset(pair.unshifted)
    s = _word_multiset(pair.shifted)
    if pair.shift_type == "DA":
        extra = s.copy()
        for w in u:
            if w in extra:
                extra.remove(w)
        if extra != ["to"] or len(s) != len(u) + 1:
            raise PairError(f"pair {pair.id}: DA orders must differ by exactly one inserted 'to'")
    elif u != s:
        raise PairError(f"pair {pair.id}: orders do not contain the same words")


def write_pairs(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_record(), ensure_ascii=False) + "\n")


def read_pairs(path):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(SentencePair.from_record(json.loads(line)))
    return pairs
