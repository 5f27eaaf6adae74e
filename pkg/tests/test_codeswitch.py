import random

import pytest

from forgeqa import codeswitch, corpus
from forgeqa.errors import DictionaryParseError
from forgeqa.tokens import TokenizerPolicy, is_word_token, tokenize

from conftest import make_dataset


def test_load_dictionary_basic():
    lex = codeswitch.load_dictionary("cat 貓\ndog 狗\n", "en", "zh")
    assert len(lex) == 2
    assert lex.lookup("cat") == ("貓",)
    assert lex.lookup("CAT") == ("貓",)  # casefolded lookup


def test_load_dictionary_multimap_keeps_file_order():
    lex = codeswitch.load_dictionary("law 法律\nlaw 定律\n")
    assert lex.lookup("law") == ("法律", "定律")


def test_load_dictionary_empty_is_identity():
    lex = codeswitch.load_dictionary("")
    assert len(lex) == 0
    span = tokenize("nothing changes", TokenizerPolicy.SPACE)
    text, flags = codeswitch.substitute_tokens(span, lex)
    assert text == "nothing changes"
    assert flags == (0, 0)


def test_load_dictionary_rejects_bad_line():
    with pytest.raises(DictionaryParseError) as err:
        codeswitch.load_dictionary("one\n")
    assert "line 1" in str(err.value)


def test_substitute_single_hit():
    lex = codeswitch.load_dictionary("cat 貓\n")
    span = tokenize("the cat sat", TokenizerPolicy.SPACE)
    text, flags = codeswitch.substitute_tokens(span, lex)
    assert text == "the 貓 sat"
    assert flags == (0, 1, 0)


def test_substitute_mirrors_published_example():
    lex = codeswitch.load_dictionary("law 法律\nthermodynamics 熱力學\n", "en", "zh")
    span = tokenize("second law of thermodynamics", TokenizerPolicy.SPACE)
    text, flags = codeswitch.substitute_tokens(span, lex)
    assert text == "second 法律 of 熱力學"
    assert flags == (0, 1, 0, 1)


def test_substitute_never_touches_punctuation():
    lex = codeswitch.load_dictionary(". DOT\ncat 貓\n")
    span = tokenize("cat .", TokenizerPolicy.SPACE)
    text, flags = codeswitch.substitute_tokens(span, lex)
    assert text == "貓 ."
    assert flags == (1, 0)


def _fixture_dataset():
    # 8 word tokens across context and question, 3 of them dictionary keys
    return make_dataset(
        [("the cat sat on the mat", [("q1", "who is", [("cat", 4)])])]
    )


def test_ratio_is_exact_fraction():
    d = _fixture_dataset()
    lex = codeswitch.load_dictionary("cat 貓\nmat 墊\nsat 坐\n")
    out, report = codeswitch.codeswitch_dataset(d, lex, scope="both")
    assert report.total_word_tokens == 8
    assert report.substituted_tokens == 3
    assert report.ratio == pytest.approx(0.375)
    corpus.validate_dataset(out)


def test_empty_dictionary_is_identity_with_zero_ratio():
    d = _fixture_dataset()
    out, report = codeswitch.codeswitch_dataset(d, codeswitch.load_dictionary(""))
    assert corpus.strip_lineage(out) == d
    assert report.ratio == 0.0


def test_answers_rederived_from_substituted_context():
    d = make_dataset([("the cat sat", [("q1", "who", [("cat sat", 4)])])])
    lex = codeswitch.load_dictionary("cat 貓\n")
    out, _ = codeswitch.codeswitch_dataset(d, lex, scope="context")
    _, paragraph, qa = next(out.iter_qas())
    assert paragraph.context == "the 貓 sat"
    assert qa.answers[0] == corpus.Answer("貓 sat", 4)
    corpus.validate_dataset(out)


def test_question_scope_leaves_context_alone():
    d = make_dataset([("the cat sat", [("q1", "the cat", [("cat", 4)])])])
    lex = codeswitch.load_dictionary("cat 貓\n")
    out, report = codeswitch.codeswitch_dataset(d, lex, scope="question")
    _, paragraph, qa = next(out.iter_qas())
    assert paragraph.context == "the cat sat"
    assert qa.question == "the 貓"
    assert qa.answers[0] == corpus.Answer("cat", 4)
    # only the question's 2 word tokens are in scope
    assert report.total_word_tokens == 2
    assert report.substituted_tokens == 1


def test_choice_first_is_deterministic_without_seed():
    d = _fixture_dataset()
    lex = codeswitch.load_dictionary("cat 貓\ncat 猫\n")
    a, _ = codeswitch.codeswitch_dataset(d, lex, choice="first")
    b, _ = codeswitch.codeswitch_dataset(d, lex, choice="first")
    assert a == b
    _, paragraph, _ = next(a.iter_qas())
    assert "貓" in paragraph.context


def test_seeded_choice_reproducible():
    d = _fixture_dataset()
    lex = codeswitch.load_dictionary("cat A\ncat B\nsat C\nsat D\nmat E\nmat F\n")
    a, _ = codeswitch.codeswitch_dataset(d, lex, choice="seeded", seed=13)
    b, _ = codeswitch.codeswitch_dataset(d, lex, choice="seeded", seed=13)
    assert a == b
    results = {
        corpus.serialize_dataset(codeswitch.codeswitch_dataset(d, lex, choice="seeded", seed=s)[0])
        for s in range(8)
    }
    assert len(results) > 1  # different seeds reach different choices


def test_iff_condition_on_random_fixtures():
    rng = random.Random(404)
    words = [f"w{i}" for i in range(30)]
    pairs = "\n".join(f"{w} X{w}" for w in words[:12])
    lex = codeswitch.load_dictionary(pairs)
    for _ in range(200):
        text = " ".join(rng.choice(words + [",", "."]) for _ in range(rng.randrange(1, 15)))
        span = tokenize(text, TokenizerPolicy.SPACE)
        new_text, flags = codeswitch.substitute_tokens(span, lex)
        new_span = tokenize(new_text, TokenizerPolicy.SPACE)
        assert len(new_span.tokens) == len(span.tokens)
        for tok, new_tok, flag in zip(span.tokens, new_span.tokens, flags):
            in_dict = is_word_token(tok.text) and lex.lookup(tok.text) is not None
            assert flag == int(in_dict)
            if in_dict:
                assert new_tok.text == lex.lookup(tok.text)[0]
            else:
                assert new_tok.text == tok.text
