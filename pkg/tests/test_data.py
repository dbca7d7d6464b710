import pytest

from textkge.data import (RawTuple, TupleFormatError, build_dataset,
                          compute_stats, load_tuples, normalize_text,
                          word_coverage)


def write(tmp_path, text, name="tuples.tsv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestNormalizeText:
    def test_lowercases(self):
        assert normalize_text("Being hungry") == "being hungry"

    def test_empty_is_fixed_point(self):
        assert normalize_text("") == ""

    def test_trims_and_collapses_whitespace(self):
        assert normalize_text("  GO  to   Zoo ") == "go to zoo"

    def test_idempotent(self):
        for raw in ("A  b\tC", " x ", "", "one two"):
            once = normalize_text(raw)
            assert normalize_text(once) == once


class TestLoadTuples:
    def test_rel_first(self, tmp_path):
        path = write(tmp_path, "causes\tgo to zoo\tsee animal\n")
        assert load_tuples(path, "rel-first") == [
            RawTuple("go to zoo", "causes", "see animal")]

    def test_src_first(self, tmp_path):
        path = write(tmp_path, "go to zoo\tcauses\tsee animal\n")
        assert load_tuples(path, "src-first") == [
            RawTuple("go to zoo", "causes", "see animal")]

    def test_rel_first_ignores_score_column(self, tmp_path):
        path = write(tmp_path, "causes\tgo to zoo\tsee animal\t1.0\n")
        assert load_tuples(path, "rel-first")[0].target == "see animal"

    def test_line_count_preserved(self, tmp_path):
        lines = "".join(f"s{i}\tr\tt{i}\n" for i in range(1200))
        assert len(load_tuples(write(tmp_path, lines))) == 1200

    def test_empty_file_is_empty_list(self, tmp_path):
        assert load_tuples(write(tmp_path, "")) == []

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = write(tmp_path, "a\tr\tb\nonly-two\tcols\n")
        with pytest.raises(TupleFormatError, match=":2:"):
            load_tuples(path)

    def test_blank_lines_skipped(self, tmp_path):
        path = write(tmp_path, "a\tr\tb\n\n\nc\tr\td\n")
        assert len(load_tuples(path)) == 2

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="format"):
            load_tuples(write(tmp_path, ""), "columns")


class TestBuildDataset:
    def test_whitespace_tokenization(self):
        ds = build_dataset([RawTuple("go to zoo", "causes", "see animal")])
        assert ds.entity_tokens[ds.vocab.entities["go to zoo"]] == [
            ds.vocab.words["go"], ds.vocab.words["to"], ds.vocab.words["zoo"]]

    def test_oov_words_in_test(self):
        ds = build_dataset(
            [RawTuple("fly kite", "requires", "wind")],
            test=[RawTuple("fly giant kite", "requires", "wind")])
        eid = next(i for i, t in enumerate(ds.entity_texts)
                   if t == "fly giant kite")
        assert ds.entity_tokens[eid] == [
            ds.vocab.words["fly"], ds.vocab.oov_word_id, ds.vocab.words["kite"]]

    def test_unseen_entities_get_fresh_ids(self):
        ds = build_dataset(
            [RawTuple("a b", "r", "c")],
            test=[RawTuple("x y", "r", "c")])
        eid = ds.test[0][0]
        assert eid >= ds.n_train_entities
        assert ds.is_unseen_entity(eid)

    def test_empty_train_rejected(self):
        with pytest.raises(ValueError):
            build_dataset([])

    def test_deterministic_ids(self):
        tuples = [RawTuple(f"e{i} x", "r", f"e{(i + 1) % 5} x")
                  for i in range(5)]
        a = build_dataset(tuples)
        b = build_dataset(tuples)
        assert a.vocab.words == b.vocab.words
        assert a.entity_texts == b.entity_texts
        assert a.train == b.train

    def test_round_trip_entity_text(self):
        ds = build_dataset([RawTuple("Go  To Zoo", "causes", "See Animal")])
        id_to_word = {i: w for w, i in ds.vocab.words.items()}
        for text, eid in ds.vocab.entities.items():
            assert " ".join(id_to_word[t] for t in ds.entity_tokens[eid]) == text

    def test_no_dev_test_word_leakage(self):
        ds = build_dataset(
            [RawTuple("a b", "r", "c")],
            test=[RawTuple("new words", "r", "c")])
        train_words = {"a", "b", "r", "c"}
        assert set(ds.vocab.words) == train_words
        assert ds.vocab.oov_word_id == len(train_words)


class TestStats:
    def test_seen_unseen_partition(self):
        train = [RawTuple("a", "r", "b"), RawTuple("c", "r", "d")]
        test = [RawTuple("a", "r", "d"), RawTuple("zz", "r", "b"),
                RawTuple("c", "r", "b")]
        ds = build_dataset(train, test=test)
        unseen = sum(ds.is_unseen_entity(s) for s, _, _ in ds.test)
        seen = sum(not ds.is_unseen_entity(s) for s, _, _ in ds.test)
        assert unseen + seen == len(ds.test)
        assert compute_stats(ds).unseen_tuple_proportion == pytest.approx(1 / 3)

    def test_all_seen_gives_zero(self):
        ds = build_dataset([RawTuple("a", "r", "b")],
                           test=[RawTuple("a", "r", "b")])
        assert compute_stats(ds).unseen_tuple_proportion == 0.0

    def test_avg_entity_length_over_distinct_entities(self):
        # entities: "a b c" (3), "d" (1) -> mean 2.0 regardless of repeats
        train = [RawTuple("a b c", "r", "d"), RawTuple("a b c", "r2", "d")]
        assert compute_stats(build_dataset(train)).avg_entity_length == 2.0

    def test_counts(self):
        train = [RawTuple("a b", "r1", "c"), RawTuple("c", "r2", "a b")]
        ds = build_dataset(train, dev=[RawTuple("a b", "r1", "c")])
        stats = compute_stats(ds)
        assert stats.tuple_counts == (2, 1, 0)
        assert stats.entity_count == 2
        assert stats.relation_count == 2
        assert stats.word_count == 5  # a b r1 c r2


class TestWordCoverage:
    def test_subset_gives_one(self):
        ds = build_dataset([RawTuple("a b", "r", "c")],
                           test=[RawTuple("a c", "r", "b")])
        assert word_coverage(ds) == 1.0

    def test_half_covered(self):
        # test entity word types {a, b, c, d}; training entities cover {a, b}
        ds = build_dataset([RawTuple("a b", "r", "a")],
                           test=[RawTuple("a b", "r", "c d")])
        assert word_coverage(ds) == 0.5

    def test_empty_test_rejected(self):
        ds = build_dataset([RawTuple("a", "r", "b")])
        with pytest.raises(ValueError):
            word_coverage(ds)
