import pytest

from sdgdetect.corpus import (
    ALL_SDGS,
    Dataset,
    Document,
    LabeledDocument,
    load_documents,
    save_documents,
    tokenize,
)
from sdgdetect.errors import IoError, SchemaError


class TestTokenize:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Good Health!", ["good", "health"]),
            ("co-operate", ["co", "operate"]),
            ("", []),
            ("don't stop", ["don", "t", "stop"]),
            ("SDG 13 goals", ["sdg", "13", "goals"]),
            ("snake_case splits", ["snake", "case", "splits"]),
            ("Überschuss naïve", ["überschuss", "naïve"]),
        ],
    )
    def test_cases(self, text, expected):
        assert tokenize(text) == expected

    def test_idempotent_on_canonical_form(self):
        tokens = tokenize("Some mixed-case TEXT, with 42 numbers!")
        assert tokenize(" ".join(tokens)) == tokens


class TestLoad:
    def test_jsonl_labeled(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"end poverty","labels":[1],"evaluated":[1]}\n')
        ds = load_documents(p)
        doc = ds.documents[0]
        assert isinstance(doc, LabeledDocument)
        assert doc.labels == frozenset({1})
        assert doc.evaluated == frozenset({1})
        assert ds.kind == "labeled"

    def test_labels_default_evaluated_all_17(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"x","labels":[3]}\n')
        doc = load_documents(p).documents[0]
        assert doc.evaluated == ALL_SDGS

    def test_unlabeled_record(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"plain"}\n')
        ds = load_documents(p)
        assert not isinstance(ds.documents[0], LabeledDocument)
        assert ds.kind == "unlabeled"

    def test_sdg_out_of_range(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"x","labels":[18]}\n')
        with pytest.raises(SchemaError):
            load_documents(p)

    def test_labels_must_be_subset_of_evaluated(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"x","labels":[2],"evaluated":[1]}\n')
        with pytest.raises(SchemaError):
            load_documents(p)

    def test_missing_id(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"text":"x"}\n')
        with pytest.raises(SchemaError):
            load_documents(p)

    def test_duplicate_ids(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"x"}\n{"id":"d1","text":"y"}\n')
        with pytest.raises(SchemaError):
            load_documents(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            load_documents(tmp_path / "nope.jsonl")

    def test_csv(self, tmp_path):
        p = tmp_path / "ds.csv"
        p.write_text('id,text,labels,evaluated\nd1,"end poverty, now",1|2,1|2|3\nd2,other,,\n')
        ds = load_documents(p)
        assert ds.documents[0].labels == frozenset({1, 2})
        assert ds.documents[0].evaluated == frozenset({1, 2, 3})
        assert ds.documents[0].text == "end poverty, now"
        assert not isinstance(ds.documents[1], LabeledDocument)

    def test_csv_bad_header(self, tmp_path):
        p = tmp_path / "ds.csv"
        p.write_text("name,body\nx,y\n")
        with pytest.raises(SchemaError):
            load_documents(p)

    def test_roundtrip(self, tmp_path):
        docs = (
            LabeledDocument.from_text("d1", "End Poverty now", [1], [1, 2]),
            LabeledDocument.from_text("d2", "safe water"),
            Document.from_text("d3", "no labels here"),
        )
        ds = Dataset("mix", docs, kind="labeled")
        out = tmp_path / "mix.jsonl"
        save_documents(ds, out)
        loaded = load_documents(out, name="mix", kind="labeled")
        assert loaded == ds

    def test_word_count(self):
        doc = Document.from_text("d", "three word text")
        assert doc.word_count == 3 == len(doc.tokens)

    def test_invalid_json_line(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text('{"id":"d1","text":"ok"}\n{broken\n')
        with pytest.raises(SchemaError) as err:
            load_documents(p)
        assert ":2" in str(err.value)

    def test_empty_dataset_rejected(self, tmp_path):
        p = tmp_path / "ds.jsonl"
        p.write_text("\n")
        with pytest.raises(SchemaError):
            load_documents(p)
