import json
from types import SimpleNamespace

import pytest

from empra.model import (
    Document,
    IngestError,
    ParseError,
    Query,
    RankedList,
    RunEntry,
    TargetSpec,
    load_corpus,
    load_queries,
    load_run,
    load_targets,
    read_report,
    split_sentences,
    write_report,
    write_targets,
)


class TestSplitSentences:
    def test_basic_boundaries(self):
        assert split_sentences("A b. C d?") == ["A b.", "C d?"]

    def test_abbreviation_protected(self):
        # hand-applied rule: "Dr" is on the abbreviation list, so no boundary
        assert split_sentences("Dr. Smith left.") == ["Dr. Smith left."]

    def test_empty(self):
        assert split_sentences("") == []
        assert split_sentences("   ") == []

    def test_short_tokens_split(self):
        assert split_sentences("A. B.") == ["A.", "B."]

    def test_no_terminator(self):
        assert split_sentences("no punctuation here") == ["no punctuation here"]

    def test_terminator_without_space_not_boundary(self):
        assert split_sentences("pay $3.50 now. thanks") == ["pay $3.50 now.", "thanks"]

    def test_other_abbreviations(self):
        assert split_sentences("See e.g. the chart. Done.") == [
            "See e.g. the chart.",
            "Done.",
        ]
        assert split_sentences("Mrs. Jones vs. Mr. Day won.") == ["Mrs. Jones vs. Mr. Day won."]

    def test_exclamation_and_question(self):
        assert split_sentences("Stop! Why? Go.") == ["Stop!", "Why?", "Go."]

    def test_abbreviation_case_insensitive(self):
        assert split_sentences("DR. WHO ran.") == ["DR. WHO ran."]

    def test_punctuation_prefix_before_abbreviation(self):
        assert split_sentences("(Dr. Smith) left. Next.") == ["(Dr. Smith) left.", "Next."]

    def test_idempotent_on_each_sentence(self):
        texts = [
            "A b. C d?",
            "Dr. Smith left. He was tired! Was he?",
            "one two three. four five.  six",
            "See e.g. the chart. Done.",
        ]
        for text in texts:
            for sentence in split_sentences(text):
                assert split_sentences(sentence) == [sentence]

    def test_whitespace_runs_preserved_inside_sentence(self):
        assert split_sentences("a  b. c") == ["a  b.", "c"]


class TestDocument:
    def test_from_text_populates_sentences(self):
        d = Document.from_text("d1", "One two. Three four.")
        assert d.sentences == ("One two.", "Three four.")
        assert len(d) == 2

    def test_join_invariant_enforced(self):
        with pytest.raises(ValueError):
            Document(docid="d1", text="alpha beta", sentences=("alpha",))

    def test_explicit_sentences_allowed_when_consistent(self):
        # an inserted segment may contain internal terminators; the type only
        # requires that sentences reassemble into the text
        d = Document(docid="d1", text="x y. z w.", sentences=("x y. z w.",))
        assert len(d) == 1

    def test_empty_text_gives_empty_doc(self):
        d = Document.from_text("d1", "")
        assert d.sentences == ()


class TestLoadCorpus:
    def test_two_tsv_rows(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("d1\talpha beta.\nd2\tgamma delta.\n", encoding="utf-8")
        corpus = load_corpus(str(p))
        assert len(corpus) == 2
        assert corpus["d1"].text == "alpha beta."

    def test_missing_tab_reports_line(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("d1\n", encoding="utf-8")
        with pytest.raises(ParseError) as exc:
            load_corpus(str(p))
        assert exc.value.line_no == 1

    def test_jsonl_sentences(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"docid":"d1","text":"A. B."}\n', encoding="utf-8")
        corpus = load_corpus(str(p), fmt="jsonl")
        assert corpus["d1"].sentences == ("A.", "B.")

    def test_duplicate_docid(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("d1\ta.\nd1\tb.\n", encoding="utf-8")
        with pytest.raises(IngestError):
            load_corpus(str(p))

    def test_jsonl_missing_field(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"docid":"d1"}\n', encoding="utf-8")
        with pytest.raises(ParseError):
            load_corpus(str(p), fmt="jsonl")


class TestLoadQueries:
    def test_single_row(self, tmp_path):
        p = tmp_path / "q.tsv"
        p.write_text("q1\tcan anyone take prenatal vitamins?\n", encoding="utf-8")
        queries = load_queries(str(p))
        assert len(queries) == 1
        assert queries["q1"].text == "can anyone take prenatal vitamins?"

    def test_empty_file(self, tmp_path):
        p = tmp_path / "q.tsv"
        p.write_text("", encoding="utf-8")
        assert load_queries(str(p)) == {}

    def test_duplicate_qid(self, tmp_path):
        p = tmp_path / "q.tsv"
        p.write_text("q1\ta\nq1\tb\n", encoding="utf-8")
        with pytest.raises(IngestError):
            load_queries(str(p))


class TestLoadRun:
    def test_two_rows(self, tmp_path):
        p = tmp_path / "r.run"
        p.write_text("q1 Q0 d9 1 5.5 t\nq1 Q0 d2 2 4.0 t\n", encoding="utf-8")
        runs = load_run(str(p))
        assert [e.rank for e in runs["q1"].entries] == [1, 2]
        assert [e.docid for e in runs["q1"].entries] == ["d9", "d2"]

    def test_non_consecutive_ranks(self, tmp_path):
        p = tmp_path / "r.run"
        p.write_text("q1 Q0 d9 1 5.5 t\nq1 Q0 d2 3 4.0 t\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_run(str(p))

    def test_interleaved_qids(self, tmp_path):
        p = tmp_path / "r.run"
        p.write_text(
            "q1 Q0 a 1 3.0 t\nq2 Q0 b 1 9.0 t\nq1 Q0 c 2 2.0 t\nq2 Q0 d 2 8.0 t\n",
            encoding="utf-8",
        )
        runs = load_run(str(p))
        assert set(runs) == {"q1", "q2"}
        assert runs["q1"].depth == 2 and runs["q2"].depth == 2

    def test_unparsable_score(self, tmp_path):
        p = tmp_path / "r.run"
        p.write_text("q1 Q0 d9 1 abc t\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_run(str(p))

    def test_increasing_score_rejected(self, tmp_path):
        p = tmp_path / "r.run"
        p.write_text("q1 Q0 d9 1 1.0 t\nq1 Q0 d2 2 4.0 t\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_run(str(p))

    def test_score_monotone_property(self, tmp_path):
        p = tmp_path / "r.run"
        rows = [f"q1 Q0 d{i} {i} {10.0 - i} t" for i in range(1, 21)]
        p.write_text("\n".join(rows) + "\n", encoding="utf-8")
        lst = load_run(str(p))["q1"]
        for a, b in zip(lst.entries, lst.entries[1:]):
            assert b.score <= a.score


class TestRankedList:
    def test_duplicate_docid(self):
        with pytest.raises(ValueError):
            RankedList(
                qid="q",
                entries=(RunEntry("d", 2.0, 1), RunEntry("d", 1.0, 2)),
            )

    def test_rank_of(self):
        lst = RankedList(qid="q", entries=(RunEntry("a", 2.0, 1), RunEntry("b", 1.0, 2)))
        assert lst.rank_of("b") == 2
        assert lst.rank_of("zz") is None


def _outcome(qid, docid, orig_rank, adv_rank, **kw):
    return SimpleNamespace(
        qid=qid,
        docid=docid,
        orig_rank=orig_rank,
        adv_rank=adv_rank,
        boost=orig_rank - adv_rank,
        adv_text=kw.get("adv_text", "inserted text"),
        position=kw.get("position", 0),
        c_coh=kw.get("c_coh", 0.5),
        c_rel_norm=kw.get("c_rel_norm", 0.75),
        score_interp=kw.get("score_interp", 0.625),
        adv_document=kw.get("adv_document", "inserted text original."),
    )


class TestReport:
    def test_empty(self, tmp_path):
        p = tmp_path / "rep.jsonl"
        write_report([], str(p))
        assert p.read_text(encoding="utf-8") == ""

    def test_sorted_deterministic(self, tmp_path):
        a = _outcome("q2", "d1", 10, 3)
        b = _outcome("q1", "d9", 20, 5)
        p1, p2 = tmp_path / "r1.jsonl", tmp_path / "r2.jsonl"
        write_report([a, b], str(p1))
        write_report([b, a], str(p2))
        assert p1.read_bytes() == p2.read_bytes()
        rows = [json.loads(line) for line in p1.read_text(encoding="utf-8").splitlines()]
        assert [(r["qid"], r["docid"]) for r in rows] == [("q1", "d9"), ("q2", "d1")]

    def test_boost_field(self, tmp_path):
        p = tmp_path / "rep.jsonl"
        write_report([_outcome("q1", "d1", 91, 1)], str(p))
        row = json.loads(p.read_text(encoding="utf-8"))
        assert row["boost"] == 90

    def test_round_trip(self, tmp_path):
        p = tmp_path / "rep.jsonl"
        outs = [_outcome("q1", "d1", 91, 1), _outcome("q1", "d2", 55, 55, position=None)]
        write_report(outs, str(p))
        rows = read_report(str(p))
        assert len(rows) == 2
        assert rows[0]["orig_rank"] == 91 and rows[0]["adv_rank"] == 1
        assert rows[0]["c_rel"] == 0.75
        assert rows[1]["position"] is None
        # writing the parsed rows' values again must give identical bytes
        reread = [
            SimpleNamespace(**{**r, "c_rel_norm": r["c_rel"]}) for r in rows
        ]
        p2 = tmp_path / "rep2.jsonl"
        write_report(reread, str(p2))
        assert p.read_bytes() == p2.read_bytes()


class TestTargets:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "t.jsonl"
        targets = [
            TargetSpec("q1", "d5", "easy", 57),
            TargetSpec("q1", "d9", "hard", 998),
            TargetSpec("q2", "d2", "mixture", 120),
        ]
        write_targets(targets, str(p))
        assert load_targets(str(p)) == targets

    def test_bad_difficulty(self):
        with pytest.raises(ValueError):
            TargetSpec("q", "d", "medium", 3)

    def test_bad_rank(self):
        with pytest.raises(ValueError):
            TargetSpec("q", "d", "easy", 0)

    def test_query_validation(self):
        with pytest.raises(ValueError):
            Query(qid="q1", text="   ")
