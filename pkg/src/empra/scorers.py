"""Scorer roles and their reference / remote realizations.

Four roles drive an attack: an embedder mapping texts to vectors, a
relevance scorer (the generic ranking model), a coherence scorer (the
next-sentence predictor), and the victim ranker used only for evaluation.
The reference implementations are deterministic and offline: a signed
hashing-trick bag-of-words embedder plus cosine-based relevance and
coherence proxies.  The remote client speaks the model-server wire
protocol (POST /embed, /score, /nsp, /perplexity) over HTTP/JSON.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import requests

from .vecmath import cosine

__all__ = [
    "EmbedderSpec",
    "ScorerRoles",
    "RemoteError",
    "tokenize",
    "fnv1a64",
    "ReferenceEmbedder",
    "ReferenceRelevance",
    "ReferenceCoherence",
    "CachingEmbedder",
    "RemoteClient",
    "RemoteEmbedder",
    "RemoteRelevance",
    "RemoteCoherence",
    "embed_reference",
    "rel_score_reference",
    "coherence_reference",
    "remote_embed",
    "remote_rel_score",
    "remote_nsp",
    "remote_perplexity",
]

# Unicode alphanumeric runs (underscore excluded), lowercased.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class EmbedderSpec:
    """Which embedder backs the attack: a seeded reference or a remote server."""

    kind: str  # "reference" | "remote"
    dim: int = 256
    seed: int = 0
    endpoint: str = ""

    def __post_init__(self):
        if self.kind not in ("reference", "remote"):
            raise ValueError(f"unknown embedder kind {self.kind!r}")
        if self.dim < 2:
            raise ValueError(f"embedder dim must be >= 2, got {self.dim}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote embedder requires an endpoint")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")


class ReferenceEmbedder:
    """Deterministic signed hashing-trick embedder.

    Per distinct token: hash = FNV-1a 64 over (8-byte big-endian seed ++
    UTF-8 token), bucket = hash mod dim, sign from bit 63, weight
    1 + ln(term frequency).  The result is L2-normalized; an empty token
    list embeds to the zero vector.
    """

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self._seed_bytes = int(seed).to_bytes(8, "big")
        self._token_slots: dict[str, tuple[int, float]] = {}

    def _slot(self, token: str) -> tuple[int, float]:
        slot = self._token_slots.get(token)
        if slot is None:
            h = fnv1a64(self._seed_bytes + token.encode("utf-8"))
            sign = 1.0 if (h >> 63) == 0 else -1.0
            slot = (h % self.dim, sign)
            self._token_slots[token] = slot
        return slot

    def embed_one(self, text: str) -> np.ndarray:
        v = np.zeros(self.dim)
        counts: dict[str, int] = {}
        for tok in tokenize(text):
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            bucket, sign = self._slot(tok)
            v[bucket] += sign * (1.0 + math.log(tf))
        norm = np.linalg.norm(v)
        if norm > 0:
            v /= norm
        return v

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.stack([self.embed_one(t) for t in texts])


class CachingEmbedder:
    """Per-run memoization of embed calls, keyed by exact text."""

    def __init__(self, inner):
        self.inner = inner
        self.dim = inner.dim
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        with self._lock:
            missing = [t for t in texts if t not in self._cache]
            missing = list(dict.fromkeys(missing))
        if missing:
            fresh = self.inner.embed(missing)
            with self._lock:
                for t, v in zip(missing, fresh):
                    self._cache[t] = v
        with self._lock:
            if not texts:
                return np.zeros((0, self.dim))
            return np.stack([self._cache[t] for t in texts])


class ReferenceRelevance:
    """Relevance as cosine between reference embeddings of query and doc."""

    def __init__(self, embedder):
        self.embedder = embedder

    def score(self, query: str, docs: Sequence[str]) -> np.ndarray:
        if not docs:
            return np.zeros(0)
        qv = self.embedder.embed([query])[0]
        dv = self.embedder.embed(list(docs))
        qn = np.linalg.norm(qv)
        dn = np.linalg.norm(dv, axis=1)
        out = np.zeros(len(docs))
        if qn > 0:
            nz = dn > 0
            out[nz] = (dv[nz] @ qv) / (dn[nz] * qn)
        return out


class ReferenceCoherence:
    """Next-sentence compatibility proxy: (1 + cosine) / 2, in [0, 1]."""

    def __init__(self, embedder):
        self.embedder = embedder

    def prob_next(self, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
        if not pairs:
            return np.zeros(0)
        firsts = self.embedder.embed([a for a, _ in pairs])
        seconds = self.embedder.embed([b for _, b in pairs])
        out = np.empty(len(pairs))
        for i in range(len(pairs)):
            out[i] = (1.0 + cosine(firsts[i], seconds[i])) / 2.0
        return out


@dataclass
class ScorerRoles:
    """The four scorer handles of one attack configuration.

    ``relevance`` and ``victim`` are distinct roles even when backed by the
    same implementation; the victim must only ever be consulted during rank
    evaluation, never while generating or selecting adversarial content.
    """

    embedder: object
    relevance: object
    coherence: object
    victim: object

    @classmethod
    def reference(
        cls,
        dim: int = 256,
        seed: int = 0,
        victim_seed: int | None = None,
    ) -> "ScorerRoles":
        emb = CachingEmbedder(ReferenceEmbedder(dim=dim, seed=seed))
        victim_emb = (
            emb
            if victim_seed is None or victim_seed == seed
            else CachingEmbedder(ReferenceEmbedder(dim=dim, seed=victim_seed))
        )
        return cls(
            embedder=emb,
            relevance=ReferenceRelevance(emb),
            coherence=ReferenceCoherence(emb),
            victim=ReferenceRelevance(victim_emb),
        )

    @classmethod
    def remote(cls, endpoint: str, max_in_flight: int = 4) -> "ScorerRoles":
        client = RemoteClient(endpoint, max_in_flight=max_in_flight)
        emb = CachingEmbedder(RemoteEmbedder(client))
        return cls(
            embedder=emb,
            relevance=RemoteRelevance(client),
            coherence=RemoteCoherence(client),
            victim=RemoteRelevance(client),
        )


class RemoteError(RuntimeError):
    """A remote scorer call failed; carries the endpoint and the cause."""

    def __init__(self, endpoint: str, message: str):
        super().__init__(f"{endpoint}: {message}")
        self.endpoint = endpoint


class RemoteClient:
    """HTTP client for the model-server wire protocol.

    One JSON POST per call; callers are expected to batch all texts of one
    target document into a single request.  A semaphore bounds the number
    of in-flight requests; each response is matched to its own request, so
    the client is safe to share across worker threads.
    """

    def __init__(self, base_url: str, timeout: float = 60.0, max_in_flight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._slots = threading.Semaphore(max_in_flight)
        self._session = requests.Session()

    def _post(self, route: str, body: dict) -> dict:
        url = self.base_url + route
        with self._slots:
            try:
                resp = self._session.post(url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                raise RemoteError(url, f"transport failure: {exc}") from exc
        if resp.status_code >= 400:
            detail = ""
            try:
                detail = resp.json().get("error", "")
            except ValueError:
                pass
            raise RemoteError(url, f"status {resp.status_code}: {detail}")
        try:
            return resp.json()
        except ValueError as exc:
            raise RemoteError(url, f"non-JSON response: {exc}") from exc

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, 0))
        url = self.base_url + "/embed"
        payload = self._post("/embed", {"texts": list(texts)})
        vectors = payload.get("vectors")
        dim = payload.get("dim")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise RemoteError(url, f"expected {len(texts)} vectors")
        if not isinstance(dim, int) or dim < 1:
            raise RemoteError(url, f"bad dim field: {dim!r}")
        try:
            arr = np.asarray(vectors, dtype=np.float64)
        except ValueError as exc:
            raise RemoteError(url, f"ragged vectors: {exc}") from exc
        if arr.ndim != 2 or arr.shape[1] != dim:
            raise RemoteError(url, f"vector shape {arr.shape} does not match dim {dim}")
        if not np.all(np.isfinite(arr)):
            raise RemoteError(url, "non-finite vector components")
        return arr

    def score(self, query: str, docs: Sequence[str]) -> np.ndarray:
        if not docs:
            return np.zeros(0)
        url = self.base_url + "/score"
        payload = self._post("/score", {"query": query, "docs": list(docs)})
        scores = payload.get("scores")
        if not isinstance(scores, list) or len(scores) != len(docs):
            raise RemoteError(url, f"expected {len(docs)} scores")
        arr = np.asarray(scores, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise RemoteError(url, "non-finite scores")
        return arr

    def nsp(self, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
        if not pairs:
            return np.zeros(0)
        url = self.base_url + "/nsp"
        payload = self._post("/nsp", {"pairs": [[a, b] for a, b in pairs]})
        probs = payload.get("probs")
        if not isinstance(probs, list) or len(probs) != len(pairs):
            raise RemoteError(url, f"expected {len(pairs)} probabilities")
        arr = np.asarray(probs, dtype=np.float64)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
            raise RemoteError(url, "probabilities outside [0, 1]")
        return arr

    def perplexity(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros(0)
        url = self.base_url + "/perplexity"
        payload = self._post("/perplexity", {"texts": list(texts)})
        ppl = payload.get("ppl")
        if not isinstance(ppl, list) or len(ppl) != len(texts):
            raise RemoteError(url, f"expected {len(texts)} perplexities")
        if any(x is None for x in ppl):
            raise RemoteError(url, "per-item perplexity failure (null entry)")
        arr = np.asarray(ppl, dtype=np.float64)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise RemoteError(url, "perplexities must be finite and positive")
        return arr

    def healthz(self) -> dict:
        url = self.base_url + "/healthz"
        with self._slots:
            try:
                resp = self._session.get(url, timeout=self.timeout)
            except requests.RequestException as exc:
                raise RemoteError(url, f"transport failure: {exc}") from exc
        if resp.status_code != 200:
            raise RemoteError(url, f"status {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise RemoteError(url, f"non-JSON response: {exc}") from exc


class RemoteEmbedder:
    """Embedder role backed by a RemoteClient; dim learned on first call."""

    def __init__(self, client: RemoteClient, dim: int | None = None):
        self.client = client
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim or 0))
        arr = self.client.embed(texts)
        if self.dim is None:
            self.dim = arr.shape[1]
        elif arr.shape[1] != self.dim:
            raise RemoteError(
                self.client.base_url + "/embed",
                f"dim changed from {self.dim} to {arr.shape[1]}",
            )
        return arr

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed([text])[0]


class RemoteRelevance:
    def __init__(self, client: RemoteClient):
        self.client = client

    def score(self, query: str, docs: Sequence[str]) -> np.ndarray:
        return self.client.score(query, docs)


class RemoteCoherence:
    def __init__(self, client: RemoteClient):
        self.client = client

    def prob_next(self, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
        return self.client.nsp(pairs)


# Spec-shaped convenience wrappers around the classes above.

def _reference_from_spec(spec: EmbedderSpec) -> ReferenceEmbedder:
    if spec.kind != "reference":
        raise ValueError("reference scorer requires a reference EmbedderSpec")
    return ReferenceEmbedder(dim=spec.dim, seed=spec.seed)


def embed_reference(text: str, spec: EmbedderSpec) -> np.ndarray:
    return _reference_from_spec(spec).embed_one(text)


def rel_score_reference(query: str, doc_text: str, spec: EmbedderSpec) -> float:
    emb = _reference_from_spec(spec)
    return cosine(emb.embed_one(query), emb.embed_one(doc_text))


def coherence_reference(prefix_text: str, suffix_text: str, spec: EmbedderSpec) -> float:
    emb = _reference_from_spec(spec)
    return (1.0 + cosine(emb.embed_one(prefix_text), emb.embed_one(suffix_text))) / 2.0


def remote_embed(texts: Sequence[str], endpoint: str) -> list[np.ndarray]:
    return list(RemoteClient(endpoint).embed(texts))


def remote_rel_score(query: str, doc_texts: Sequence[str], endpoint: str) -> list[float]:
    return RemoteClient(endpoint).score(query, doc_texts).tolist()


def remote_nsp(pairs: Sequence[tuple[str, str]], endpoint: str) -> list[float]:
    return RemoteClient(endpoint).nsp(pairs).tolist()


def remote_perplexity(texts: Sequence[str], endpoint: str) -> list[float]:
    return RemoteClient(endpoint).perplexity(texts).tolist()
