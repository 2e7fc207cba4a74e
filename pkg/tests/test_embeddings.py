import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from droprec.corpus import AnnotatedSentence
from droprec.embeddings import (
    EmbeddingError,
    EmbeddingTable,
    context_embedding,
    deterministic_fallback_table,
    fallback_vector,
    load_embeddings,
    table_from_source,
)


def test_load_small_word2vec_file(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("2 3\na 1 0 0\nb 0 1 0\n", encoding="utf-8")
    table = load_embeddings(p)
    assert table.dim == 3
    assert np.array_equal(table.lookup("a"), [1.0, 0.0, 0.0])
    assert np.array_equal(table.lookup("b"), [0.0, 1.0, 0.0])


def test_oov_lookup_is_zero_vector(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("1 2\na 1 2\n", encoding="utf-8")
    table = load_embeddings(p)
    assert np.array_equal(table.lookup("missing"), np.zeros(2))


def test_load_accepts_dim_300(tmp_path):
    p = tmp_path / "vec.txt"
    row = " ".join(["0.5"] * 300)
    p.write_text(f"2 300\nfoo {row}\nbar {row}\n", encoding="utf-8")
    table = load_embeddings(p, expected_dim=300)
    assert table.dim == 300
    assert table.lookup("foo").shape == (300,)


def test_load_rejects_row_dim_mismatch(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("1 3\na 1 0\n", encoding="utf-8")
    with pytest.raises(EmbeddingError, match="line 2: expected 3 components, got 2"):
        load_embeddings(p)


def test_load_rejects_non_numeric(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("1 2\na 1 oops\n", encoding="utf-8")
    with pytest.raises(EmbeddingError, match="non-numeric"):
        load_embeddings(p)


def test_load_rejects_expected_dim_conflict(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("1 3\na 1 0 0\n", encoding="utf-8")
    with pytest.raises(EmbeddingError, match="conflicts with expected 5"):
        load_embeddings(p, expected_dim=5)


def test_load_rejects_bad_header(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("3\na 1 0 0\n", encoding="utf-8")
    with pytest.raises(EmbeddingError, match="header"):
        load_embeddings(p)


def test_duplicate_words_keep_first_and_count(tmp_path):
    p = tmp_path / "vec.txt"
    p.write_text("3 2\na 1 2\na 9 9\nb 3 4\n", encoding="utf-8")
    table = load_embeddings(p)
    assert np.array_equal(table.lookup("a"), [1.0, 2.0])
    assert table.duplicates_skipped == 1


# --- fallback table ---------------------------------------------------------


def test_fallback_is_pure_function_of_word_and_seed():
    t1 = deterministic_fallback_table(["alpha", "beta"], 8, seed=42)
    t2 = deterministic_fallback_table(["beta", "alpha"], 8, seed=42)
    assert np.array_equal(t1.lookup("alpha"), t2.lookup("alpha"))
    assert np.array_equal(t1.lookup("alpha"), fallback_vector("alpha", 8, 42))


def test_fallback_different_seeds_differ():
    a = fallback_vector("word", 16, seed=1)
    b = fallback_vector("word", 16, seed=2)
    assert not np.array_equal(a, b)


def test_fallback_components_in_range():
    for word in ("x", "yy", "zzz"):
        vec = fallback_vector(word, 10, seed=7)
        assert np.all(vec >= -0.5 / 10) and np.all(vec <= 0.5 / 10)


def test_fallback_rejects_bad_dim():
    with pytest.raises(EmbeddingError):
        deterministic_fallback_table(["a"], 0, seed=0)


def test_table_rebuild_from_source():
    table = deterministic_fallback_table(["a", "b"], 4, seed=9)
    again = table_from_source(table.source)
    assert np.array_equal(table.lookup("a"), again.lookup("a"))
    with pytest.raises(EmbeddingError, match="source kind"):
        table_from_source({"kind": "nope"})


# --- context embeddings ------------------------------------------------------


def basis_table(words, dim=None):
    dim = dim or len(words)
    vectors = {w: np.eye(dim)[i] for i, w in enumerate(words)}
    return EmbeddingTable(dim, vectors)


def test_interior_gap_window_one():
    table = basis_table(["a", "b"])
    sent = AnnotatedSentence(("a", "b"))
    ctx = context_embedding(sent, 1, 1, table)
    assert np.array_equal(ctx.values, np.concatenate([table.lookup("a"), table.lookup("b")]))
    assert ctx.values.shape == (2 * table.dim,)


def test_boundary_gap_pads_with_zeros():
    table = basis_table(["a", "b"])
    sent = AnnotatedSentence(("a", "b"))
    ctx = context_embedding(sent, 0, 1, table)
    assert np.array_equal(ctx.values, np.concatenate([np.zeros(2), table.lookup("a")]))


def test_window_two_ordering_hand_derived():
    # gap 1 in [a, b, c] with W=2 reads: pad, a | b, c
    table = basis_table(["a", "b", "c"])
    sent = AnnotatedSentence(("a", "b", "c"))
    ctx = context_embedding(sent, 1, 2, table)
    expected = np.concatenate(
        [np.zeros(3), table.lookup("a"), table.lookup("b"), table.lookup("c")]
    )
    assert np.array_equal(ctx.values, expected)
    assert ctx.values.shape == (4 * 3,)


def test_gap_out_of_range_rejected():
    table = basis_table(["a"])
    sent = AnnotatedSentence(("a",))
    with pytest.raises(ValueError, match="out of range"):
        context_embedding(sent, 2, 1, table)


def test_all_oov_sentence_gives_zero_vector():
    table = basis_table(["known"], dim=4)
    sent = AnnotatedSentence(("alien", "words"))
    ctx = context_embedding(sent, 1, 2, table)
    assert not ctx.values.any()


@settings(max_examples=60)
@given(
    st.lists(st.sampled_from(["a", "b", "c", "oov"]), min_size=1, max_size=12),
    st.integers(min_value=1, max_value=4),
    st.data(),
)
def test_context_length_always_2wd(tokens, window, data):
    table = basis_table(["a", "b", "c"])
    sent = AnnotatedSentence(tuple(tokens))
    gap = data.draw(st.integers(min_value=0, max_value=len(tokens)))
    ctx = context_embedding(sent, gap, window, table)
    assert ctx.values.shape == (2 * window * table.dim,)


def test_adjacent_gaps_share_shifted_window():
    table = basis_table(["t0", "t1", "t2", "t3", "t4"])
    sent = AnnotatedSentence(("t0", "t1", "t2", "t3", "t4"))
    d = table.dim
    a = context_embedding(sent, 2, 2, table).values
    b = context_embedding(sent, 3, 2, table).values
    # tokens t1, t2, t3 appear in both windows, one slot over
    assert np.array_equal(a[d : 2 * d], b[0:d])
    assert np.array_equal(a[2 * d : 3 * d], b[d : 2 * d])
    assert np.array_equal(a[3 * d : 4 * d], b[2 * d : 3 * d])
