"""Judgment-study state: assignments, the append-only judgment log, and
aggregation with the exclusion rules.

Participants rate 25 pairs each on a 1-7 scale (1 = first-presented
sentence far more natural). Ratings are recoded onto a fixed
"preference for the unshifted order" scale using the recorded
presentation order before any aggregation. Aggregation is a pure fold
over the logs, so replaying them reproduces identical output.
"""

import json
import random
import statistics
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

DEFAULT_SEED = 1729
UNSHIFTED_FIRST = "unshifted_first"
SHIFTED_FIRST = "shifted_first"


class StudyError(Exception):
    pass


class ConflictError(StudyError):
    """Duplicate participant or duplicate (participant, pair) submission."""


class NotFoundError(StudyError):
    """The judgment does not reference an issued assignment item."""


class ValidationError(StudyError):
    """Malformed judgment payload."""


class PoolExhaustedError(StudyError):
    pass


@dataclass(frozen=True)
class AssignmentItem:
    pair_id: str
    presentation_order: str
    is_attention_check: bool
    sentence_a: str
    sentence_b: str

    def to_record(self):
        return {
            "pair_id": self.pair_id,
            "presentation_order": self.presentation_order,
            "is_attention_check": self.is_attention_check,
            "sentence_a": self.sentence_a,
            "sentence_b": self.sentence_b,
        }


@dataclass(frozen=True)
class Assignment:
    participant_id: str
    items: tuple
    issued_at: str

    def to_record(self):
        return {
            "participant_id": self.participant_id,
            "items": [item.to_record() for item in self.items],
            "issued_at": self.issued_at,
        }


@dataclass(frozen=True)
class AggregateJudgment:
    pair_id: str
    n: int
    mean_rating: float
    stddev: float
    excluded: bool
    reason: str | None

    def to_record(self):
        return {
            "pair_id": self.pair_id,
            "n": self.n,
            "mean_rating": self.mean_rating,
            "stddev": self.stddev,
            "excluded": self.excluded,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class ExclusionConfig:
    max_stddev: float = 1.5
    min_ratings: int = 3
    attention_fail_threshold: float = 0.5


def recode(rating, presentation_order):
    """Map a presentation-relative rating onto the unshifted-preference scale."""
    return rating if presentation_order == UNSHIFTED_FIRST else 8 - rating


def _check_passed(rating, presentation_order):
    # the natural member is presented in the "unshifted" slot; an attentive
    # rating lands in the natural sentence's half of the scale
    return rating <= 3 if presentation_order == UNSHIFTED_FIRST else rating >= 5


def aggregate(judgments, item_index, config=ExclusionConfig()):
    """Per-pair aggregates under the exclusion rules.

    ``item_index`` maps (participant_id, pair_id) to the issued item.
    Participants failing more than the configured fraction of their
    attention checks contribute nothing at all. Pairs with fewer than the
    quorum of ratings, or with rating stddev above the cutoff, are
    flagged excluded.
    """
    failures = {}
    for j in judgments:
        item = item_index[(j["participant_id"], j["pair_id"])]
        if not item.is_attention_check:
            continue
        seen, failed = failures.get(j["participant_id"], (0, 0))
        passed = _check_passed(j["rating"], item.presentation_order)
        failures[j["participant_id"]] = (seen + 1, failed + (0 if passed else 1))
    dropped = {
        pid for pid, (seen, failed) in failures.items()
        if seen and failed / seen > config.attention_fail_threshold
    }
    by_pair = {}
    for j in judgments:
        if j["participant_id"] in dropped:
            continue
        item = item_index[(j["participant_id"], j["pair_id"])]
        if item.is_attention_check:
            continue
        by_pair.setdefault(j["pair_id"], []).append(recode(j["rating"], item.presentation_order))
    out = []
    for pair_id in sorted(by_pair):
        ratings = by_pair[pair_id]
        n = len(ratings)
        mean = sum(ratings) / n
        stddev = statistics.stdev(ratings) if n >= 2 else 0.0
        if n < config.min_ratings:
            excluded, reason = True, "quorum"
        elif stddev > config.max_stddev:
            excluded, reason = True, "stddev"
        else:
            excluded, reason = False, None
        out.append(AggregateJudgment(pair_id, n, mean, stddev, excluded, reason))
    return out


def load_attention_checks(path=None):
    """Attention-check catalogue: pairs with a grossly ungrammatical member."""
    if path is None:
        from importlib import resources

        text = resources.files("shiftbench.data").joinpath("attention_checks.jsonl").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    checks = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            checks.append(json.loads(line))
    return checks


class StudyStore:
    """Assignment issuing and the append-only judgment log.

    All mutation happens under one lock; logs live as JSON Lines under
    ``data_dir`` (or memory only when no directory is given) and are
    replayed on startup.
    """

    def __init__(self, pool, attention_checks=None, data_dir=None, seed=DEFAULT_SEED,
                 items_per_assignment=25, attention_count=2, exclusion=ExclusionConfig()):
        self.pool = list(pool)
        self.attention_checks = attention_checks if attention_checks is not None else []
        self.data_dir = Path(data_dir) if data_dir else None
        self.seed = seed
        self.items_per_assignment = items_per_assignment
        self.attention_count = min(attention_count, len(self.attention_checks))
        self.exclusion = exclusion
        self._lock = threading.Lock()
        self._pool_index = {pair.id: i for i, pair in enumerate(self.pool)}
        self._issue_counts = {pair.id: 0 for pair in self.pool}
        self._assignments = {}
        self._item_index = {}
        self._judgments = []
        self._submitted = set()
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._replay()

    @property
    def assignments_path(self):
        return self.data_dir / "assignments.jsonl"

    @property
    def judgments_path(self):
        return self.data_dir / "judgments.jsonl"

    def _replay(self):
        if self.assignments_path.exists():
            for line in self.assignments_path.read_text("utf-8").splitlines():
                if line.strip():
                    self._register_assignment(_assignment_from_record(json.loads(line)))
        if self.judgments_path.exists():
            for line in self.judgments_path.read_text("utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self._judgments.append(rec)
                    self._submitted.add((rec["participant_id"], rec["pair_id"]))

    def _register_assignment(self, assignment):
        self._assignments[assignment.participant_id] = assignment
        for item in assignment.items:
            self._item_index[(assignment.participant_id, item.pair_id)] = item
            if not item.is_attention_check and item.pair_id in self._issue_counts:
                self._issue_counts[item.pair_id] += 1

    def _append(self, name, record):
        if self.data_dir:
            with open(self.data_dir / name, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def create_assignment(self, participant_id):
        with self._lock:
            if participant_id in self._assignments:
                raise ConflictError(f"participant {participant_id!r} already has an assignment")
            if len(self.pool) < self.items_per_assignment:
                raise PoolExhaustedError(
                    f"pool holds {len(self.pool)} pairs, "
                    f"assignments need {self.items_per_assignment}"
                )
            rng = random.Random(f"{self.seed}:{participant_id}")
            ranked = sorted(self.pool, key=lambda p: (self._issue_counts[p.id], self._pool_index[p.id]))
            chosen = ranked[: self.items_per_assignment]
            rng.shuffle(chosen)
            items = []
            for pair in chosen:
                order = UNSHIFTED_FIRST if rng.random() < 0.5 else SHIFTED_FIRST
                first, second = (
                    (pair.unshifted, pair.shifted) if order == UNSHIFTED_FIRST
                    else (pair.shifted, pair.unshifted)
                )
                items.append(AssignmentItem(pair.id, order, False, first, second))
            for check in rng.sample(self.attention_checks, self.attention_count):
                order = UNSHIFTED_FIRST if rng.random() < 0.5 else SHIFTED_FIRST
                first, second = (
                    (check["natural"], check["scrambled"])
                    if order == UNSHIFTED_FIRST
                    else (check["scrambled"], check["natural"])
                )
                items.insert(
                    rng.randrange(len(items) + 1),
                    AssignmentItem(check["id"], order, True, first, second),
                )
            assignment = Assignment(
                participant_id=participant_id,
                items=tuple(items),
                issued_at=datetime.now(timezone.utc).isoformat(),
            )
            self._register_assignment(assignment)
            self._append("assignments.jsonl", assignment.to_record())
            return assignment

    def submit_judgment(self, record):
        """Validate and append one judgment; returns the stored record."""
        rating = record.get("rating")
        if not isinstance(rating, int) or not 1 <= rating <= 7:
            raise ValidationError(f"rating must be an integer in 1..7, got {rating!r}")
        key = (record.get("participant_id"), record.get("pair_id"))
        with self._lock:
            item = self._item_index.get(key)
            if item is None:
                raise NotFoundError(f"no issued assignment item for {key}")
            if record.get("presentation_order") not in (None, item.presentation_order):
                raise ValidationError(
                    f"presentation_order {record['presentation_order']!r} does not match "
                    f"the issued item ({item.presentation_order})"
                )
            if key in self._submitted:
                raise ConflictError(f"judgment for {key} already submitted")
            stored = {
                "participant_id": key[0],
                "pair_id": key[1],
                "presentation_order": item.presentation_order,
                "rating": rating,
                "response_time_ms": record.get("response_time_ms"),
                "submitted_at": record.get("submitted_at")
                or datetime.now(timezone.utc).isoformat(),
            }
            self._judgments.append(stored)
            self._submitted.add(key)
            self._append("judgments.jsonl", stored)
            return stored

    def aggregates(self):
        with self._lock:
            judgments = list(self._judgments)
            index = dict(self._item_index)
        return aggregate(judgments, index, self.exclusion)


def _assignment_from_record(rec):
    return Assignment(
        participant_id=rec["participant_id"],
        items=tuple(
            AssignmentItem(
                pair_id=i["pair_id"],
                presentation_order=i["presentation_order"],
                is_attention_check=i["is_attention_check"],
                sentence_a=i["sentence_a"],
                sentence_b=i["sentence_b"],
            )
            for i in rec["items"]
        ),
        issued_at=rec["issued_at"],
    )
