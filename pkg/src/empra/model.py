"""Domain types and file ingestion for the retrieval universe.

Covers queries, documents with deterministic sentence segmentation, ranked
lists, attack-target specs, and the line-oriented file formats: TSV and
JSONL corpora, six-column run files, JSONL target lists, and the JSONL
attack report.  All types are immutable after construction and safe to
share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "ParseError",
    "IngestError",
    "Query",
    "Document",
    "RunEntry",
    "RankedList",
    "TargetSpec",
    "split_sentences",
    "load_corpus",
    "load_queries",
    "load_run",
    "load_targets",
    "write_targets",
    "write_report",
    "read_report",
    "REPORT_FIELDS",
]

# Terminators that may end a sentence, and the dotted tokens that never do.
_TERMINATORS = frozenset(".!?")
_ABBREVIATIONS = frozenset({"mr", "mrs", "dr", "st", "e.g", "i.e", "etc", "vs"})


class ParseError(ValueError):
    """A malformed row in an input file; carries the file path and line number."""

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class IngestError(ValueError):
    """A structurally valid file that violates an ingestion invariant."""


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def _token_before(text: str, idx: int) -> str:
    """The whitespace-delimited chunk ending just before text[idx], with
    leading punctuation stripped so "(Dr." still matches "dr"."""
    j = idx
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    chunk = text[j:idx]
    k = 0
    while k < len(chunk) and not chunk[k].isalnum():
        k += 1
    return chunk[k:]


def split_sentences(text: str) -> list[str]:
    """Deterministic rule-based sentence segmentation.

    A boundary is a '.', '!' or '?' followed by whitespace or end of text,
    unless the terminator directly follows a known abbreviation (mr, mrs,
    dr, st, e.g, i.e, etc, vs; case-insensitive).  Empty segments are
    dropped; character content inside each sentence is preserved.
    """
    sentences: list[str] = []
    start = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        if i + 1 < n and not text[i + 1].isspace():
            continue
        if _token_before(text, i).lower() in _ABBREVIATIONS:
            continue
        segment = text[start : i + 1].strip()
        if segment:
            sentences.append(segment)
        start = i + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class Query:
    qid: str
    text: str

    def __post_init__(self):
        if not self.qid:
            raise ValueError("empty qid")
        if not self.text.strip():
            raise ValueError(f"query {self.qid!r} has empty text")


@dataclass(frozen=True)
class Document:
    """A document plus its ordered sentence segmentation.

    The single-space join of ``sentences`` must equal ``text`` up to
    whitespace collapsing; original bytes of the text are retained.
    """

    docid: str
    text: str
    sentences: tuple[str, ...]

    def __post_init__(self):
        if not self.docid:
            raise ValueError("empty docid")
        if _collapse_ws(" ".join(self.sentences)) != _collapse_ws(self.text):
            raise ValueError(
                f"document {self.docid!r}: sentences do not reassemble into text"
            )
        if self.text.strip() and not self.sentences:
            raise ValueError(f"document {self.docid!r}: non-empty text, no sentences")

    @classmethod
    def from_text(cls, docid: str, text: str) -> "Document":
        return cls(docid=docid, text=text, sentences=tuple(split_sentences(text)))

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class RunEntry:
    docid: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    """Per-query ordering of documents, ranks 1..m with non-increasing scores."""

    qid: str
    entries: tuple[RunEntry, ...]

    def __post_init__(self):
        seen: set[str] = set()
        prev_score = None
        for i, e in enumerate(self.entries):
            if e.rank != i + 1:
                raise ValueError(
                    f"run for {self.qid!r}: rank {e.rank} at position {i + 1}, "
                    "ranks must be consecutive from 1"
                )
            if prev_score is not None and e.score > prev_score:
                raise ValueError(
                    f"run for {self.qid!r}: score increases at rank {e.rank}"
                )
            if e.docid in seen:
                raise ValueError(f"run for {self.qid!r}: duplicate docid {e.docid!r}")
            seen.add(e.docid)
            prev_score = e.score

    @property
    def depth(self) -> int:
        return len(self.entries)

    def rank_of(self, docid: str) -> int | None:
        for e in self.entries:
            if e.docid == docid:
                return e.rank
        return None


_DIFFICULTIES = ("easy", "hard", "mixture")


@dataclass(frozen=True)
class TargetSpec:
    qid: str
    docid: str
    difficulty: str
    original_rank: int

    def __post_init__(self):
        if self.difficulty not in _DIFFICULTIES:
            raise ValueError(f"unknown difficulty {self.difficulty!r}")
        if self.original_rank < 1:
            raise ValueError(f"original_rank must be positive, got {self.original_rank}")


def _iter_lines(path: str) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            yield line_no, line.rstrip("\n")


def load_corpus(path: str, fmt: str = "tsv") -> dict[str, Document]:
    """Load docid -> Document from a TSV ("docid<TAB>text") or JSONL file."""
    docs: dict[str, Document] = {}
    for line_no, line in _iter_lines(path):
        docid, text = _parse_id_text_row(path, line_no, line, fmt, "docid")
        if docid in docs:
            raise IngestError(f"{path}: duplicate docid {docid!r} at line {line_no}")
        docs[docid] = Document.from_text(docid, text)
    return docs


def load_queries(path: str, fmt: str = "tsv") -> dict[str, Query]:
    """Load qid -> Query; same formats as load_corpus with a "qid" field."""
    queries: dict[str, Query] = {}
    for line_no, line in _iter_lines(path):
        qid, text = _parse_id_text_row(path, line_no, line, fmt, "qid")
        if qid in queries:
            raise IngestError(f"{path}: duplicate qid {qid!r} at line {line_no}")
        queries[qid] = Query(qid=qid, text=text)
    return queries


def _parse_id_text_row(
    path: str, line_no: int, line: str, fmt: str, id_field: str
) -> tuple[str, str]:
    if fmt == "tsv":
        if "\t" not in line:
            raise ParseError(path, line_no, "expected <id><TAB><text>, no tab found")
        ident, text = line.split("\t", 1)
        if not ident:
            raise ParseError(path, line_no, f"empty {id_field}")
        return ident, text
    if fmt == "jsonl":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict) or id_field not in obj or "text" not in obj:
            raise ParseError(path, line_no, f'object must carry "{id_field}" and "text"')
        return str(obj[id_field]), str(obj["text"])
    raise ValueError(f"unknown corpus format {fmt!r}")


def load_run(path: str) -> dict[str, RankedList]:
    """Load a standard six-column run file ("qid Q0 docid rank score tag")."""
    per_qid: dict[str, list[RunEntry]] = {}
    for line_no, line in _iter_lines(path):
        fields = line.split()
        if len(fields) != 6:
            raise ParseError(path, line_no, f"expected 6 columns, got {len(fields)}")
        qid, _, docid, rank_s, score_s, _ = fields
        try:
            rank = int(rank_s)
        except ValueError as exc:
            raise ParseError(path, line_no, f"unparsable rank {rank_s!r}") from exc
        try:
            score = float(score_s)
        except ValueError as exc:
            raise ParseError(path, line_no, f"unparsable score {score_s!r}") from exc
        per_qid.setdefault(qid, []).append(RunEntry(docid=docid, score=score, rank=rank))
    runs: dict[str, RankedList] = {}
    for qid, entries in per_qid.items():
        entries.sort(key=lambda e: e.rank)  # stable: file order kept for equal ranks
        runs[qid] = RankedList(qid=qid, entries=tuple(entries))
    return runs


def load_targets(path: str) -> list[TargetSpec]:
    targets: list[TargetSpec] = []
    for line_no, line in _iter_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"invalid JSON: {exc}") from exc
        try:
            targets.append(
                TargetSpec(
                    qid=str(obj["qid"]),
                    docid=str(obj["docid"]),
                    difficulty=str(obj["difficulty"]),
                    original_rank=int(obj["original_rank"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(path, line_no, f"invalid target spec: {exc}") from exc
    return targets


def write_targets(targets: Iterable[TargetSpec], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in targets:
            fh.write(
                json.dumps(
                    {
                        "qid": t.qid,
                        "docid": t.docid,
                        "difficulty": t.difficulty,
                        "original_rank": t.original_rank,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


REPORT_FIELDS = (
    "qid",
    "docid",
    "orig_rank",
    "adv_rank",
    "boost",
    "adv_text",
    "position",
    "c_coh",
    "c_rel",
    "score_interp",
    "adv_document",
)


def write_report(outcomes: Iterable, path: str) -> None:
    """Write attack outcomes as JSONL, one object per line.

    Field names and their order are fixed (see ``REPORT_FIELDS``); lines are
    sorted by (qid, docid) so identical outcome sets produce identical bytes.
    """
    rows = sorted(outcomes, key=lambda o: (o.qid, o.docid))
    with open(path, "w", encoding="utf-8") as fh:
        for o in rows:
            record = {
                "qid": o.qid,
                "docid": o.docid,
                "orig_rank": o.orig_rank,
                "adv_rank": o.adv_rank,
                "boost": o.boost,
                "adv_text": o.adv_text,
                "position": o.position,
                "c_coh": o.c_coh,
                "c_rel": o.c_rel_norm,
                "score_interp": o.score_interp,
                "adv_document": o.adv_document,
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")


def read_report(path: str) -> list[dict]:
    """Parse a report written by write_report back into dict rows."""
    rows: list[dict] = []
    for line_no, line in _iter_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"invalid JSON: {exc}") from exc
        missing = [f for f in REPORT_FIELDS if f not in obj]
        if missing:
            raise ParseError(path, line_no, f"report row missing fields {missing}")
        rows.append(obj)
    return rows
