import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bpe_merges_oracle
from tricorpus.bpe import (
    BpeModel,
    DuplicateSpecial,
    EmptyCorpus,
    detokenize,
    extend_vocab,
    learn_bpe,
    load_model,
    save_model,
    tokenize,
)


def rand_corpus(rng, max_chars=200):
    alphabet = "абвгд"
    lines = []
    used = 0
    for _ in range(rng.randint(1, 6)):
        words = []
        for _ in range(rng.randint(1, 6)):
            w = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
            if used + len(w) > max_chars:
                break
            words.append(w)
            used += len(w)
        if words:
            lines.append(" ".join(words))
    return lines or ["аб"]


def test_merges_match_oracle_on_random_corpora():
    rng = random.Random(99)
    for _ in range(100):
        lines = rand_corpus(rng)
        merges = rng.randint(0, 20)
        model = learn_bpe(lines, merges)
        assert model.merges == bpe_merges_oracle(lines, merges)


def test_worked_example():
    # "aaab ab aab" style corpus: most frequent pair merges first,
    # ties break to the lexicographically smaller pair.
    model = learn_bpe(["aaab ab", "aaab"], num_merges=3)
    assert model.merges[0] == ("a", "a")
    trace = tokenize(model, "aaab")
    assert "".join(trace).endswith("b</w>")
    assert detokenize(model, trace) == "aaab"


def test_overlapping_pairs_counted_per_position():
    # "aaaa": three adjacent (a, a) positions in one word.
    model = learn_bpe(["aaaa"], num_merges=1)
    assert model.merges == [("a", "a")]


def test_stops_below_frequency_two():
    # Every pair unique: nothing reaches frequency 2, no merges learned.
    model = learn_bpe(["абвг"], num_merges=10)
    assert model.merges == []
    assert set(model.vocab) == {"а", "б", "в", "г</w>"}


def test_empty_corpus_raises():
    with pytest.raises(EmptyCorpus):
        learn_bpe(["   ", ""], num_merges=5)


def test_vocab_ids_contiguous_and_ordered():
    model = learn_bpe(["абаб аб"], num_merges=4)
    ids = sorted(model.vocab.values())
    assert ids == list(range(len(model.vocab)))
    # Alphabet tokens first, merge products after, in learn order.
    for left, right in model.merges:
        assert model.vocab[left + right] > max(model.vocab[left], model.vocab[right])


def test_tokenize_applies_merges_in_learned_order():
    model = learn_bpe(["абаб абаб аб"], num_merges=6)
    tokens = tokenize(model, "абаб")
    assert detokenize(model, tokens) == "абаб"
    for tok in tokens:
        assert model.is_known(tok)


def test_tokenize_unknown_characters_stay_unmerged():
    model = learn_bpe(["абаб аб"], num_merges=2)
    tokens = tokenize(model, "xy")
    assert tokens == ["x", "y</w>"]


def test_extend_vocab_keeps_base_ids_stable():
    base = learn_bpe(["абаб аб аб"], num_merges=3)
    new = learn_bpe(["вгвг вг вг"], num_merges=3, word_end_marker=base.word_end_marker)
    extended = extend_vocab(base, new, "lez_Cyrl")
    for token, idx in base.vocab.items():
        assert extended.vocab[token] == idx
    assert extended.base_vocab_size == len(base.vocab)
    assert extended.vocab["lez_Cyrl"] == len(extended.vocab) - 1
    assert extended.specials == base.specials + ["lez_Cyrl"]
    new_ids = [extended.vocab[t] for t in new.vocab if t not in base.vocab]
    assert new_ids == sorted(new_ids)
    assert min(new_ids) >= len(base.vocab)


def test_extend_vocab_merges_appended():
    base = learn_bpe(["абаб аб"], num_merges=2)
    new = learn_bpe(["вгвг вг"], num_merges=2)
    extended = extend_vocab(base, new, "azj_Latn")
    assert extended.merges[: len(base.merges)] == base.merges
    for m in new.merges:
        assert m in extended.merges


def test_extend_vocab_duplicate_special_raises():
    base = learn_bpe(["абаб аб"], num_merges=1)
    new = learn_bpe(["вг вг"], num_merges=1)
    once = extend_vocab(base, new, "lez_Cyrl")
    with pytest.raises(DuplicateSpecial):
        extend_vocab(once, new, "lez_Cyrl")


def test_extend_vocab_marker_mismatch_raises():
    base = learn_bpe(["абаб аб"], num_merges=1)
    new = learn_bpe(["вг вг"], num_merges=1, word_end_marker="@@")
    with pytest.raises(ValueError):
        extend_vocab(base, new, "azj_Latn")


def test_save_load_round_trip(tmp_path):
    model = learn_bpe(["абаб аб кӀвал кӀвал"], num_merges=5)
    new = learn_bpe(["söz söz ev"], num_merges=2)
    extended = extend_vocab(model, new, "azj_Latn")
    path = tmp_path / "model.json"
    save_model(extended, path)
    loaded = load_model(path)
    assert loaded == extended


@st.composite
def corpora(draw):
    words = draw(st.lists(
        st.text(alphabet="абвг", min_size=1, max_size=5), min_size=1, max_size=10,
    ))
    return [" ".join(words)]


@settings(max_examples=50, deadline=None)
@given(corpora(), st.integers(0, 8))
def test_round_trip_identity(lines, merges):
    model = learn_bpe(lines, merges)
    for word in lines[0].split():
        assert detokenize(model, tokenize(model, word)) == word


@settings(max_examples=50, deadline=None)
@given(corpora(), st.integers(0, 8))
def test_merges_agree_with_oracle(lines, merges):
    model = learn_bpe(lines, merges)
    assert model.merges == bpe_merges_oracle(lines, merges)


def test_model_validation_rejects_unknown_merge_product():
    with pytest.raises(ValueError):
        BpeModel(merges=[("a", "b")], vocab={"a": 0, "b": 1}, specials=[],
                 base_vocab_size=2)


def test_model_validation_rejects_gapped_ids():
    with pytest.raises(ValueError):
        BpeModel(merges=[], vocab={"a": 0, "b": 2}, specials=[], base_vocab_size=2)
