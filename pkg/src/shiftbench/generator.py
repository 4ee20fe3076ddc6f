"""Template expansion of graded minimal pairs.

A lexicon declares, per shift type, sentence frames and fillers for each
slot, plus cumulative modifier chains per base constituent. Expansion walks
the full Cartesian product of slots and modifier levels, realizing both
orders of every combination. Constituent weight grows monotonically with
modifier level, which is what gives the datasets their graded structure.
"""

import json
from dataclasses import dataclass
from importlib import resources

from .pairs import ROLES, Constituent, SentencePair
from .text import detokenize, verb_lemma

MODIFIER_CATEGORIES = ("AdjP", "PP")


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Modifier:
    category: str
    text: str


@dataclass(frozen=True)
class Frame:
    id: str
    roles: tuple
    adjunct: str | None = None


@dataclass
class ShiftLexicon:
    shift_type: str
    frames: list
    subjects: list
    verbs: list
    constituents: dict  # role -> list of base strings
    modifier_chains: dict  # base string -> list of levels, each a list of Modifier

    def chain(self, base):
        return self.modifier_chains.get(base, [])


@dataclass
class Lexicon:
    sections: dict  # shift type -> ShiftLexicon

    def section(self, shift_type):
        if shift_type not in self.sections:
            raise LexiconError(f"lexicon has no section for shift type {shift_type}")
        return self.sections[shift_type]


def _parse_chain(base, raw_levels, where):
    levels = []
    for k, raw in enumerate(raw_levels, start=1):
        mods = []
        for m in raw:
            category, text = m.get("category"), m.get("text")
            if category not in MODIFIER_CATEGORIES:
                raise LexiconError(f"{where}: chain for {base!r} level {k}: bad category {category!r}")
            if not text or not text.strip():
                raise LexiconError(f"{where}: chain for {base!r} level {k}: empty modifier text")
            mods.append(Modifier(category, text))
        if len(mods) != k:
            raise LexiconError(
                f"{where}: chain for {base!r} is not cumulative at level {k}: "
                f"expected {k} modifiers, found {len(mods)}"
            )
        if levels and mods[: k - 1] != levels[-1]:
            raise LexiconError(
                f"{where}: chain for {base!r} level {k} does not extend level {k - 1}"
            )
        levels.append(mods)
    return levels


def _parse_section(shift_type, raw):
    where = f"section {shift_type}"
    frames = []
    raw_frames = raw.get("frames", [])
    if not raw_frames:
        raise LexiconError(f"{where}: empty frame list")
    constituents = raw.get("constituents", {})
    for rf in raw_frames:
        roles = tuple(rf.get("roles", ()))
        if len(roles) != 2:
            raise LexiconError(f"{where}: frame {rf.get('id')!r} must name exactly two roles")
        for role in roles:
            if role not in constituents:
                raise LexiconError(f"{where}: frame {rf.get('id')!r} references unknown role {role!r}")
        frames.append(Frame(id=rf["id"], roles=roles, adjunct=rf.get("adjunct")))
    for name in ("subjects", "verbs"):
        if not raw.get(name):
            raise LexiconError(f"{where}: missing or empty {name}")
    for role, bases in constituents.items():
        if not bases:
            raise LexiconError(f"{where}: role {role!r} has no base constituents")
    chains = {
        base: _parse_chain(base, levels, where)
        for base, levels in raw.get("modifier_chains", {}).items()
    }
    return ShiftLexicon(
        shift_type=shift_type,
        frames=frames,
        subjects=list(raw["subjects"]),
        verbs=list(raw["verbs"]),
        constituents={r: list(b) for r, b in constituents.items()},
        modifier_chains=chains,
    )


def load_lexicon(source):
    """Parse and validate a lexicon document (JSON text or file object)."""
    text = source.read() if hasattr(source, "read") else source
    raw = json.loads(text)
    sections = {}
    for shift_type in ROLES:
        key = shift_type.lower()
        if key in raw:
            sections[shift_type] = _parse_section(shift_type, raw[key])
    if not sections:
        raise LexiconError("lexicon defines no shift sections")
    return Lexicon(sections=sections)


def default_lexicon():
    text = resources.files("shiftbench.data").joinpath("lexicon.json").read_text("utf-8")
    return load_lexicon(text)


# graded slots per shift type: HNPS grades its NP (first slot), PM its NP
# (second slot), DA and MPP grade both constituents
_GRADED = {"HNPS": (True, False), "PM": (False, True), "DA": (True, True), "MPP": (True, True)}


@dataclass(frozen=True)
class GenerationPlan:
    shift_type: str
    max_level_a: int
    max_level_b: int

    def __post_init__(self):
        if self.max_level_a < 0 or self.max_level_b < 0:
            raise ValueError("modifier levels must be >= 0")

    @classmethod
    def default(cls, shift_type, max_level):
        graded_a, graded_b = _GRADED[shift_type]
        return cls(
            shift_type=shift_type,
            max_level_a=max_level if graded_a else 0,
            max_level_b=max_level if graded_b else 0,
        )

    def validate_against(self, lexicon):
        section = lexicon.section(self.shift_type)
        for frame in section.frames:
            for role, max_level in zip(frame.roles, (self.max_level_a, self.max_level_b)):
                if max_level == 0:
                    continue
                for base in section.constituents[role]:
                    depth = len(section.chain(base))
                    if depth < max_level:
                        raise LexiconError(
                            f"base {base!r} (role {role!r}) has a {depth}-level chain, "
                            f"plan needs {max_level}"
                        )
        return self


def apply_modifiers(base, modifiers):
    """Attach modifiers to a base constituent.

    AdjP modifiers stack before the base's final (head) word in chain
    order; PP modifiers append after it.
    """
    tokens = base.split()
    pre = [m.text for m in modifiers if m.category == "AdjP"]
    post = [m.text for m in modifiers if m.category == "PP"]
    words = tokens[:-1] + [w for p in pre for w in p.split()] + tokens[-1:]
    for p in post:
        words.extend(p.split())
    return " ".join(words)


def _texts(shift_type, subject, verb, a, b, adjunct):
    head = subject.split() + verb.split()
    tail = (adjunct.split() if adjunct else []) + ["."]
    a_tok, b_tok = a.split(), b.split()
    if shift_type == "DA":
        unshifted = head + a_tok + b_tok + tail
        shifted = head + b_tok + ["to"] + a_tok + tail
    else:
        unshifted = head + a_tok + b_tok + tail
        shifted = head + b_tok + a_tok + tail
    return detokenize(unshifted), detokenize(shifted)


def expand(lexicon, plan):
    """Yield every pair in the plan's product, in deterministic order.

    Order is lexicographic over (frame, subject, verb, base_a, base_b,
    level_a, level_b), following declaration order in the lexicon.
    """
    plan.validate_against(lexicon)
    section = lexicon.section(plan.shift_type)
    shift = plan.shift_type
    role_a, role_b = ROLES[shift]
    for frame in section.frames:
        slot_a, slot_b = frame.roles
        for si, subject in enumerate(section.subjects):
            for vi, verb in enumerate(section.verbs):
                for ai, base_a in enumerate(section.constituents[slot_a]):
                    chain_a = section.chain(base_a)
                    for bi, base_b in enumerate(section.constituents[slot_b]):
                        chain_b = section.chain(base_b)
                        for la in range(plan.max_level_a + 1):
                            text_a = apply_modifiers(base_a, chain_a[la - 1] if la else [])
                            for lb in range(plan.max_level_b + 1):
                                text_b = apply_modifiers(base_b, chain_b[lb - 1] if lb else [])
                                unshifted, shifted = _texts(
                                    shift, subject, verb, text_a, text_b, frame.adjunct
                                )
                                pair = SentencePair(
                                    id=(
                                        f"syn-{shift.lower()}-{frame.id}"
                                        f"-s{si}-v{vi}-a{ai}-b{bi}-la{la}-lb{lb}"
                                    ),
                                    shift_type=shift,
                                    unshifted=unshifted,
                                    shifted=shifted,
                                    verb=verb_lemma(verb),
                                    source="synthetic",
                                    constituents=(
                                        Constituent(role_a, text_a, 0),
                                        Constituent(role_b, text_b, 1),
                                    ),
                                    frame_id=frame.id,
                                    level_a=la,
                                    level_b=lb,
                                    modifier_weight_a=la + 1,
                                    modifier_weight_b=lb + 1,
                                )
                                yield pair.validate()


def dataset_census(pairs):
    """Counts per shift type and per modifier-level cell."""
    census = {"total": 0}
    for pair in pairs:
        entry = census.setdefault(pair.shift_type, {"total": 0, "by_level": {}})
        entry["total"] += 1
        census["total"] += 1
        if pair.level_a is None and pair.level_b is None:
            cell = "-"
        else:
            cell = f"{pair.level_a},{pair.level_b}"
        entry["by_level"][cell] = entry["by_level"].get(cell, 0) + 1
    return census
