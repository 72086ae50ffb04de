import pytest

from sdgdetect.corpus import Dataset, Document
from sdgdetect.errors import QuerySyntaxError, SchemaError
from sdgdetect.systems import (
    SystemDefinition,
    detect,
    import_external_predictions,
    keyword_frequencies,
    load_system,
    to_matrix,
)


def _dataset(*texts):
    docs = tuple(Document.from_text(f"d{i+1}", t) for i, t in enumerate(texts))
    return Dataset("test", docs)


def _system(path, rows):
    lines = ["system,sdg,query_id,query"] + rows
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadSystem:
    def test_basic(self, tmp_path):
        p = _system(tmp_path / "s.csv", ['demo,1,q1,"poverty OR destitution"'])
        system = load_system(p)
        assert system.name == "demo"
        assert system.entries[0].sdg == 1
        assert system.entries[0].query_id == "q1"

    def test_duplicate_query_id(self, tmp_path):
        p = _system(tmp_path / "s.csv", ["demo,1,q1,poverty", "demo,2,q1,hunger"])
        with pytest.raises(SchemaError):
            load_system(p)

    def test_sdg_zero(self, tmp_path):
        p = _system(tmp_path / "s.csv", ["demo,0,q1,poverty"])
        with pytest.raises(SchemaError):
            load_system(p)

    def test_syntax_error_carries_context(self, tmp_path):
        p = _system(tmp_path / "s.csv", ["demo,1,q1,(poverty OR"])
        with pytest.raises(QuerySyntaxError) as err:
            load_system(p)
        assert "q1" in str(err.value) and "demo" in str(err.value)

    def test_mixed_system_names(self, tmp_path):
        p = _system(tmp_path / "s.csv", ["a,1,q1,poverty", "b,2,q2,hunger"])
        with pytest.raises(SchemaError):
            load_system(p)


class TestDetect:
    def test_single_hit(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,1,q1,poverty"]))
        hits = detect(_dataset("end poverty now"), [system])
        assert len(hits) == 1
        assert (hits[0].doc_id, hits[0].sdg, hits[0].query_id) == ("d1", 1, "q1")

    def test_empty_document_no_hits(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,1,q1,poverty"]))
        assert detect(_dataset(""), [system]) == []

    def test_near_window_boundary(self, tmp_path):
        near1 = load_system(_system(tmp_path / "a.csv", ["n1,6,q1,water NEAR/1 sanitation"]))
        near0 = load_system(_system(tmp_path / "b.csv", ["n0,6,q1,water NEAR/0 sanitation"]))
        ds = _dataset("water sanitation")
        assert len(detect(ds, [near1])) == 1
        # adjacent tokens are distance 1, which exceeds a 0 window
        assert len(detect(ds, [near0])) == 0

    def test_deterministic_and_sorted(self, tmp_path):
        system = load_system(
            _system(tmp_path / "s.csv", ["demo,1,q1,poverty", "demo,2,q2,hunger"])
        )
        ds = _dataset("hunger and poverty", "poverty")
        first = detect(ds, [system])
        second = detect(ds, [system])
        assert first == second
        keys = [(h.doc_id, h.system, h.sdg, h.query_id) for h in first]
        assert keys == sorted(keys)

    def test_pure_or_single_keyword_triggers(self, tmp_path):
        system = load_system(
            _system(tmp_path / "s.csv", ["orsys,3,q1,health OR disease OR wellbeing"])
        )
        hits = detect(_dataset("only health mentioned"), [system])
        assert len(hits) == 1 and hits[0].sdg == 3


class TestMatrix:
    def test_to_matrix(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,1,q1,poverty"]))
        ds = _dataset("poverty here", "nothing to see")
        matrix = to_matrix(detect(ds, [system]), ds, [system])
        assert matrix.is_predicted("d1", "demo", 1)
        assert not matrix.is_predicted("d2", "demo", 1)
        assert matrix.covers("d2", "demo")

    def test_duplicate_hits_collapse(self, tmp_path):
        system = load_system(
            _system(tmp_path / "s.csv", ["demo,1,q1,poverty", "demo,1,q2,destitution"])
        )
        ds = _dataset("poverty and destitution")
        hits = detect(ds, [system])
        assert len(hits) == 2
        matrix = to_matrix(hits, ds, [system])
        assert matrix.predicted("d1", "demo") == frozenset({1})

    def test_all_false_when_no_hits(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,1,q1,poverty"]))
        ds = _dataset("nothing relevant")
        matrix = to_matrix([], ds, [system])
        assert matrix.predicted("d1", "demo") == frozenset()

    def test_merge_keeps_consistency(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,1,q1,poverty"]))
        ds = _dataset("poverty")
        a = to_matrix(detect(ds, [system]), ds, [system])
        b = to_matrix([], ds, ["other"])
        a.merge(b)
        assert a.systems == ["demo", "other"]
        assert a.is_predicted("d1", "demo", 1)
        assert not a.is_predicted("d1", "other", 1)


class TestExternalPredictions:
    def test_import(self, tmp_path):
        p = tmp_path / "ext.csv"
        p.write_text("doc_id,sdg\nd1,3\nd1,7\n")
        matrix = import_external_predictions(p, "ext", known_doc_ids=["d1", "d2"])
        assert matrix.predicted("d1", "ext") == frozenset({3, 7})
        assert matrix.covers("d2", "ext")
        assert matrix.predicted("d2", "ext") == frozenset()

    def test_empty_file_all_false(self, tmp_path):
        p = tmp_path / "ext.csv"
        p.write_text("doc_id,sdg\n")
        matrix = import_external_predictions(p, "ext", known_doc_ids=["d1"])
        assert matrix.predicted("d1", "ext") == frozenset()

    def test_sdg_out_of_range(self, tmp_path):
        p = tmp_path / "ext.csv"
        p.write_text("doc_id,sdg\nd9,21\n")
        with pytest.raises(SchemaError):
            import_external_predictions(p, "ext", known_doc_ids=["d9"])

    def test_unknown_doc_strict_vs_lenient(self, tmp_path, capsys):
        p = tmp_path / "ext.csv"
        p.write_text("doc_id,sdg\nd9,2\n")
        with pytest.raises(SchemaError):
            import_external_predictions(p, "ext", known_doc_ids=["d1"])
        matrix = import_external_predictions(p, "ext", known_doc_ids=["d1"], strict=False)
        assert matrix.predicted("d1", "ext") == frozenset()
        assert "d9" in capsys.readouterr().err


class TestKeywordFrequencies:
    def test_counts_sum_positions_over_documents(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,3,q1,health"]))
        ds = _dataset("health matters", "your health")
        table = keyword_frequencies(detect(ds, [system]))
        assert table == [("demo", "health", 2)]

    def test_multiple_positions_in_one_doc(self, tmp_path):
        system = load_system(_system(tmp_path / "s.csv", ["demo,3,q1,health"]))
        text = "health and health plus health"
        ds = _dataset(text)
        table = keyword_frequencies(detect(ds, [system]))
        # independent recount by scanning tokens
        expected = sum(1 for tok in text.split() if tok == "health")
        assert table == [("demo", "health", expected)]

    def test_empty(self):
        assert keyword_frequencies([]) == []


def test_system_definition_requires_entries():
    with pytest.raises(SchemaError):
        SystemDefinition("empty", ())
