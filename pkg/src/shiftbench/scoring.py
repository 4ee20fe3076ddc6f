"""Sequence log-probability scoring against pluggable LM backends.

A backend is anything with a ``backend_id`` attribute and
``token_logprobs(text) -> (tokens, logprobs)`` / ``tokenize(text)``
methods: the built-in n-gram model, an HTTP logprob endpoint, or a
recorded-logprob replay file. All log probabilities are natural logs.
"""

import json
import os
import threading
from dataclasses import dataclass

import requests

ENV_URL = "SHIFTBENCH_LM_URL"
ENV_TOKEN = "SHIFTBENCH_LM_TOKEN"


class BackendError(Exception):
    pass


class TransportError(BackendError):
    """The backend could not be reached; retrying may succeed."""


class ProtocolError(BackendError):
    """The backend answered with a malformed or inconsistent body."""


@dataclass(frozen=True)
class ScoredSequence:
    text: str
    tokens: tuple
    token_logprobs: tuple
    m_score: float


@dataclass(frozen=True)
class PreferenceRecord:
    pair_id: str
    backend_id: str
    m_score_u: float
    m_score_s: float
    m_preference: float

    def to_record(self):
        return {
            "pair_id": self.pair_id,
            "backend_id": self.backend_id,
            "m_score_u": self.m_score_u,
            "m_score_s": self.m_score_s,
            "m_preference": self.m_preference,
        }

    @classmethod
    def from_record(cls, rec):
        return cls(rec["pair_id"], rec["backend_id"], rec["m_score_u"],
                   rec["m_score_s"], rec["m_preference"])


def score_sequence(backend, text):
    """Score a sequence: the sum of per-token conditional log probabilities."""
    if not text or not text.strip():
        raise ValueError("cannot score empty text")
    tokens, logprobs = backend.token_logprobs(text)
    if len(tokens) != len(logprobs):
        raise ProtocolError(
            f"backend {backend.backend_id} returned {len(tokens)} tokens "
            f"but {len(logprobs)} logprobs"
        )
    if any(lp > 0 for lp in logprobs):
        raise ProtocolError(f"backend {backend.backend_id} returned a positive log probability")
    return ScoredSequence(
        text=text,
        tokens=tuple(tokens),
        token_logprobs=tuple(logprobs),
        m_score=sum(logprobs),
    )


def preference(backend, pair):
    """Score both orders of a pair and their difference.

    Positive values mean the backend prefers the unshifted order. Scoring
    errors propagate; no partial record is ever produced.
    """
    unshifted = score_sequence(backend, pair.unshifted)
    shifted = score_sequence(backend, pair.shifted)
    return PreferenceRecord(
        pair_id=pair.id,
        backend_id=backend.backend_id,
        m_score_u=unshifted.m_score,
        m_score_s=shifted.m_score,
        m_preference=unshifted.m_score - shifted.m_score,
    )


def write_preferences(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_record()) + "\n")


def read_preferences(path):
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(PreferenceRecord.from_record(json.loads(line)))
    return out


class HttpLogprobBackend:
    """Client for a generic logprob endpoint.

    Wire contract: ``POST {"text": ...}`` answered by ``{"tokens":
    [...], "logprobs": [...]}``. Responses are cached on (endpoint id,
    text), in memory and optionally on disk, so reruns are deterministic
    and cheap. In-flight requests are bounded by ``max_concurrency``.
    """

    def __init__(self, url, token=None, endpoint_id=None, cache_path=None,
                 timeout=30.0, max_retries=2, max_concurrency=4, session=None):
        self.url = url
        self.token = token
        self.backend_id = endpoint_id or f"http:{url}"
        self.cache_path = cache_path
        self.timeout = timeout
        self.max_retries = max_retries
        self._session = session or requests.Session()
        self._cache = {}
        self._lock = threading.Lock()
        self._slots = threading.Semaphore(max_concurrency)
        if cache_path and os.path.exists(cache_path):
            with open(cache_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    if rec.get("backend_id") == self.backend_id:
                        self._cache[rec["text"]] = (tuple(rec["tokens"]), tuple(rec["logprobs"]))

    @classmethod
    def from_env(cls, **kwargs):
        url = os.environ.get(ENV_URL)
        if not url:
            raise BackendError(f"{ENV_URL} is not set")
        return cls(url, token=os.environ.get(ENV_TOKEN), **kwargs)

    def _post(self, text):
        last_error = None
        for _ in range(self.max_retries + 1):
            try:
                headers = {}
                if self.token:
                    headers["Authorization"] = f"Bearer {self.token}"
                resp = self._session.post(self.url, json={"text": text},
                                          headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = TransportError(f"request to {self.url} failed: {exc}")
                continue
            if resp.status_code >= 500:
                last_error = TransportError(f"endpoint returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"endpoint returned {resp.status_code}: {resp.text[:200]}")
            return resp
        raise last_error

    def fetch_logprobs(self, text):
        """Tokens and logprobs for a text, going to the network on cache miss."""
        with self._lock:
            hit = self._cache.get(text)
        if hit is not None:
            return hit
        with self._slots:
            resp = self._post(text)
        try:
            body = resp.json()
            tokens = tuple(body["tokens"])
            logprobs = tuple(float(x) for x in body["logprobs"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed response body: {exc}") from exc
        if len(tokens) != len(logprobs):
            raise ProtocolError(
                f"endpoint returned {len(tokens)} tokens but {len(logprobs)} logprobs"
            )
        with self._lock:
            self._cache[text] = (tokens, logprobs)
            if self.cache_path:
                rec = {"backend_id": self.backend_id, "text": text,
                       "tokens": list(tokens), "logprobs": list(logprobs)}
                with open(self.cache_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec) + "\n")
        return tokens, logprobs

    def token_logprobs(self, text):
        return self.fetch_logprobs(text)

    def tokenize(self, text):
        return list(self.fetch_logprobs(text)[0])


class ReplayBackend:
    """Replays logprobs recorded earlier from any real backend.

    The fixture is JSON Lines of {text, tokens, logprobs, backend_id};
    texts not present in the fixture are errors, never silent fallbacks.
    """

    def __init__(self, records, backend_id=None):
        self._table = {}
        ids = set()
        for rec in records:
            self._table[rec["text"]] = (tuple(rec["tokens"]), tuple(rec["logprobs"]))
            ids.add(rec["backend_id"])
        if not self._table:
            raise BackendError("replay fixture is empty")
        if backend_id is None:
            if len(ids) > 1:
                raise BackendError(f"replay fixture mixes backends: {sorted(ids)}")
            backend_id = ids.pop()
        self.backend_id = f"replay:{backend_id}"

    @classmethod
    def from_file(cls, path, backend_id=None):
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return cls(records, backend_id=backend_id)

    def token_logprobs(self, text):
        if text not in self._table:
            raise BackendError(f"text not in replay fixture: {text!r}")
        return self._table[text]

    def tokenize(self, text):
        return list(self.token_logprobs(text)[0])
