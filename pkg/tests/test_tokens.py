import random

import pytest

from forgeqa.errors import DatasetIntegrityError
from forgeqa.tokens import (
    TokenizerPolicy,
    is_word_token,
    remap_span,
    rewrite_tokens,
    tokenize,
)


def texts(span):
    return [t.text for t in span.tokens]


def test_space_split_with_trailing_punct():
    span = tokenize("John eats apples.", TokenizerPolicy.SPACE)
    assert texts(span) == ["John", "eats", "apples", "."]


def test_space_split_leading_and_trailing_quotes():
    span = tokenize('"Hello!" he said', TokenizerPolicy.SPACE)
    assert texts(span) == ['"', "Hello", "!", '"', "he", "said"]


def test_internal_punctuation_is_kept():
    span = tokenize("don't stop U.S. now", TokenizerPolicy.SPACE)
    assert texts(span) == ["don't", "stop", "U.S", ".", "now"]


def test_cjk_one_token_per_code_point():
    span = tokenize("熱力學", TokenizerPolicy.CJK)
    assert texts(span) == ["熱", "力", "學"]
    assert [(t.start, t.end) for t in span.tokens] == [(0, 1), (1, 2), (2, 3)]


def test_cjk_policy_is_fully_character_level():
    span = tokenize("ab 熱", TokenizerPolicy.CJK)
    assert texts(span) == ["a", "b", "熱"]


def test_mixed_matches_table_style_segmentation():
    span = tokenize("second 法律 of 熱力學", TokenizerPolicy.MIXED)
    assert texts(span) == ["second", "法", "律", "of", "熱", "力", "學"]


def test_mixed_splits_punctuation_next_to_cjk():
    span = tokenize("(abc法def), 學!", TokenizerPolicy.MIXED)
    assert texts(span) == ["(", "abc", "法", "def", ")", ",", "學", "!"]


def test_mixed_keeps_hangul_words_whole():
    span = tokenize("차이점 in 잠재력", TokenizerPolicy.MIXED)
    assert texts(span) == ["차이점", "in", "잠재력"]


def test_word_token_predicate():
    assert is_word_token("cat")
    assert is_word_token("don't")
    assert is_word_token("熱")
    assert not is_word_token(".")
    assert not is_word_token("...")


_POOLS = [
    "abcdefgh ",
    "ab .,!?¿«» \t\n",
    "熱力學第二定律 ",
    "a熱b力 ,。!英語",
    "한국어 단어 words mixed 語",
]


@pytest.mark.parametrize("policy", list(TokenizerPolicy))
def test_tokenization_is_lossless(policy):
    rng = random.Random(20240 + len(policy.value))
    for _ in range(300):
        pool = rng.choice(_POOLS)
        text = "".join(rng.choice(pool) for _ in range(rng.randrange(0, 40)))
        span = tokenize(text, policy)
        assert span.reconstruct() == text
        # tokens sorted, non-overlapping, texts match their offsets
        prev = 0
        for tok in span.tokens:
            assert prev <= tok.start < tok.end
            assert text[tok.start:tok.end] == tok.text
            prev = tok.end


def test_rewrite_preserves_gaps_and_offsets():
    span = tokenize("a cat  sat", TokenizerPolicy.SPACE)
    rewrite = rewrite_tokens(span, ["XX", "cat", "y"])
    assert rewrite.text == "XX cat  y"
    assert rewrite.starts == (0, 3, 8)
    assert rewrite.ends == (2, 6, 9)


def test_remap_span_exact_token():
    span = tokenize("the cat sat", TokenizerPolicy.SPACE)
    rewrite = rewrite_tokens(span, ["the", "tiger", "sat"])
    assert remap_span(span, rewrite, 4, 7) == (4, 9)
    assert rewrite.text[4:9] == "tiger"


def test_remap_span_snaps_to_token_boundaries():
    span = tokenize("the cat sat", TokenizerPolicy.SPACE)
    rewrite = rewrite_tokens(span, ["the", "tiger", "sat"])
    # mid-token fragment widens to the whole replaced token
    assert remap_span(span, rewrite, 5, 7) == (4, 9)


def test_remap_span_multi_token_keeps_gap():
    span = tokenize("the cat  sat", TokenizerPolicy.SPACE)
    rewrite = rewrite_tokens(span, ["the", "a", "b"])
    start, end = remap_span(span, rewrite, 4, 12)
    assert rewrite.text[start:end] == "a  b"


def test_remap_span_without_token_overlap_fails():
    span = tokenize("ab  cd", TokenizerPolicy.SPACE)
    rewrite = rewrite_tokens(span, ["ab", "cd"])
    with pytest.raises(DatasetIntegrityError):
        remap_span(span, rewrite, 2, 3)
