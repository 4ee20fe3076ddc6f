"""Bracketed constituency treebank reading, shift-pattern matching, and
minimal-pair realization.

The reader accepts Penn-Treebank-style files (one or more parenthesized
trees, arbitrary whitespace, optional unlabeled wrapping parens around each
tree). Matching walks every VP looking for the two post-verbal constituents
of a shift schema; realization reorders their yields to produce both orders
of a minimal pair.
"""

import hashlib
import random
import re
from dataclasses import dataclass, field

from .pairs import Constituent, PairError, SentencePair
from .text import detokenize, verb_lemma, word_tokens

EMPTY_LABEL = "-NONE-"


class TreebankParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class PairQualityError(ValueError):
    """A match realizes to a low-quality pair and must be dropped."""


@dataclass(frozen=True)
class ParseNode:
    label: str
    children: tuple = ()
    token: str | None = None
    span: tuple = (0, 0)

    @property
    def base_label(self):
        # function tags and coindexation stripped: NP-SBJ-1 -> NP.
        # labels that themselves start with "-" (-NONE-, -LRB-) are atomic.
        if self.label.startswith("-"):
            return self.label
        return re.split(r"[-=]", self.label)[0]

    @property
    def is_terminal(self):
        return self.token is not None

    def leaves(self):
        if self.is_terminal:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()

    def words(self):
        """Surface yield, with empty-category terminals dropped."""
        return [leaf.token for leaf in self.leaves() if leaf.label != EMPTY_LABEL]

    def contains_empty(self):
        return any(leaf.label == EMPTY_LABEL for leaf in self.leaves())

    def to_string(self):
        if self.is_terminal:
            return f"({self.label} {self.token})"
        inner = " ".join(child.to_string() for child in self.children)
        return f"({self.label} {inner})"


_TOKEN = re.compile(r"\(|\)|[^()\s]+")


@dataclass
class _Frame:
    offset: int
    items: list = field(default_factory=list)


def _close_frame(frame, offset):
    items = frame.items
    if not items:
        raise TreebankParseError("empty tree", frame.offset)
    head = items[0]
    if isinstance(head, ParseNode):
        # unlabeled group: accept the PTB "( (S ...) )" wrapper only
        if len(items) == 1:
            return head
        raise TreebankParseError("empty label", frame.offset)
    rest = items[1:]
    if not rest:
        raise TreebankParseError(f"node {head!r} has neither token nor children", frame.offset)
    if all(isinstance(it, ParseNode) for it in rest):
        return ParseNode(label=head, children=tuple(rest))
    if len(rest) == 1 and isinstance(rest[0], str):
        return ParseNode(label=head, token=rest[0])
    raise TreebankParseError(f"node {head!r} mixes tokens and subtrees", offset)


def _assign_spans(node, start):
    if node.is_terminal:
        width = 0 if node.label == EMPTY_LABEL else 1
        return ParseNode(node.label, (), node.token, (start, start + width))
    children = []
    pos = start
    for child in node.children:
        placed = _assign_spans(child, pos)
        pos = placed.span[1]
        children.append(placed)
    return ParseNode(node.label, tuple(children), None, (start, pos))


def parse_treebank(source):
    """Parse a bracketed-tree character stream into a list of trees."""
    text = source.read() if hasattr(source, "read") else source
    trees = []
    stack = []
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if tok == "(":
            stack.append(_Frame(m.start()))
        elif tok == ")":
            if not stack:
                raise TreebankParseError("unbalanced ')'", m.start())
            node = _close_frame(stack.pop(), m.start())
            if stack:
                stack[-1].items.append(node)
            else:
                trees.append(node)
        else:
            if not stack:
                raise TreebankParseError(f"stray token {tok!r} outside any tree", m.start())
            stack[-1].items.append(tok)
    if stack:
        raise TreebankParseError("unbalanced '(' at end of input", len(text))
    return [_assign_spans(tree, 0) for tree in trees]


def read_treebank_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_treebank(fh.read())


# --- shift-pattern matching ---------------------------------------------

# (label of first constituent, label of second) per schema; PM permits both orders
_SCHEMAS = {
    "HNPS": [("NP", "PP")],
    "PM": [("PRT", "NP"), ("NP", "PRT")],
    "DA": [("NP", "NP")],
    "MPP": [("PP", "PP")],
}

@dataclass(frozen=True)
class ShiftMatch:
    shift_type: str
    root: ParseNode
    vp_node: ParseNode
    verb: ParseNode
    verb_lemma: str
    constituent_a: ParseNode
    constituent_b: ParseNode
    tail: tuple


def _iter_nodes(node):
    yield node
    for child in node.children:
        yield from _iter_nodes(child)


def match_shift_pattern(tree, shift_type):
    """All shift-schema matches in the tree, outermost VP first."""
    if shift_type not in _SCHEMAS:
        raise ValueError(f"unknown shift type {shift_type!r}")
    matches = []
    for node in _iter_nodes(tree):
        if node.base_label != "VP" or node.is_terminal:
            continue
        verb_idx = None
        for i, child in enumerate(node.children):
            if child.is_terminal and child.base_label.startswith("VB"):
                verb_idx = i
                break
        if verb_idx is None:
            continue
        # surface-visible post-verbal children; empty categories are invisible
        post = [c for c in node.children[verb_idx + 1:] if c.span[1] > c.span[0]]
        if len(post) < 2:
            continue
        labels = (post[0].base_label, post[1].base_label)
        if labels not in _SCHEMAS[shift_type]:
            continue
        verb = node.children[verb_idx]
        matches.append(
            ShiftMatch(
                shift_type=shift_type,
                root=tree,
                vp_node=node,
                verb=verb,
                verb_lemma=verb_lemma(verb.token),
                constituent_a=post[0],
                constituent_b=post[1],
                tail=tuple(post[2:]),
            )
        )
    return matches


# --- realization ---------------------------------------------------------


def _pair_id(shift_type, unshifted, shifted):
    digest = hashlib.sha256(f"{shift_type}|{unshifted}|{shifted}".encode()).hexdigest()
    return f"mined-{shift_type.lower()}-{digest[:12]}"


def realize_pair(match):
    """Build both orders of the minimal pair for a shift match.

    The unshifted order follows the schema's canonical form: NP+PP for
    HNPS, verb-adjacent particle for PM, double object for DA, and the
    as-encountered PP order for MPP.
    """
    tokens = match.root.words()
    a_start, a_end = match.constituent_a.span
    b_start, b_end = match.constituent_b.span
    prefix = tokens[:a_start]
    a = tokens[a_start:a_end]
    b = tokens[b_start:b_end]
    rest = tokens[b_end:]

    shift = match.shift_type
    a_label = match.constituent_a.base_label
    if shift == "PM" and a_label == "NP":
        # normalize to particle-first as the unshifted order
        a, b = b, a
    if shift == "DA":
        if a and a[0].lower() == "to":
            raise PairQualityError(f"DA recipient already starts with 'to': {detokenize(a)!r}")
        unshifted_tokens = prefix + a + b + rest
        shifted_tokens = prefix + b + ["to"] + a + rest
    else:
        unshifted_tokens = prefix + a + b + rest
        shifted_tokens = prefix + b + a + rest

    unshifted = detokenize(unshifted_tokens)
    shifted = detokenize(shifted_tokens)
    roles = {"HNPS": ("NP", "PP"), "PM": ("PRT", "NP"), "DA": ("NP1", "NP2"), "MPP": ("PP1", "PP2")}[shift]
    pair = SentencePair(
        id=_pair_id(shift, unshifted, shifted),
        shift_type=shift,
        unshifted=unshifted,
        shifted=shifted,
        verb=match.verb_lemma,
        source="mined",
        constituents=(
            Constituent(roles[0], detokenize(a), 0),
            Constituent(roles[1], detokenize(b), 1),
        ),
    )
    return pair.validate()


# --- quality filtering and sampling --------------------------------------


@dataclass(frozen=True)
class QualityFilter:
    """Automated stand-ins for manual exclusion of malformed pairs."""

    max_constituent_words: int = 25
    verb_allowlist: frozenset | None = None
    reject_empty_categories: bool = True
    reject_quote_only: bool = True

    def accepts(self, match):
        if self.verb_allowlist is not None and match.verb_lemma not in self.verb_allowlist:
            return False
        for node in (match.constituent_a, match.constituent_b):
            if self.reject_empty_categories and node.contains_empty():
                return False
            words = word_tokens(detokenize(node.words()))
            if self.reject_quote_only and not words:
                return False
            if len(words) > self.max_constituent_words:
                return False
        return True


def mine(treebank, shift_type, sample_size, rng_seed, quality=QualityFilter()):
    """Deterministic sample of realized pairs matching one shift schema.

    Matches failing the quality filter or realization are skipped. When
    fewer candidates than ``sample_size`` survive, all are returned.
    """
    if sample_size < 0:
        raise ValueError("sample_size must be >= 0")
    candidates = []
    for tree in treebank:
        for match in match_shift_pattern(tree, shift_type):
            if not quality.accepts(match):
                continue
            try:
                candidates.append(realize_pair(match))
            except (PairQualityError, PairError):
                continue
    if len(candidates) <= sample_size:
        return candidates
    rng = random.Random(rng_seed)
    keep = sorted(rng.sample(range(len(candidates)), sample_size))
    return [candidates[i] for i in keep]
