import random

import pytest

from forgeqa import corpus, reorder
from forgeqa.errors import AlignmentError, ConlluError
from forgeqa.recovery import RecoveryPolicy

from conftest import make_dataset


def conllu(rows, text=None):
    """rows: list of (id, form, head, deprel); pad the unused columns."""
    lines = []
    if text is not None:
        lines.append(f"# text = {text}")
    for tok_id, form, head, deprel in rows:
        lines.append(
            "\t".join([str(tok_id), form, "_", "_", "_", "_", str(head), deprel, "_", "_"])
        )
    lines.append("")
    return "\n".join(lines) + "\n"


JOHN = [(1, "John", 2, "nsubj"), (2, "eats", 0, "root"), (3, "apples", 2, "obj")]


def forms(tokens):
    return [t.form for t in tokens]


def test_parse_wellformed_sentence():
    sents = reorder.parse_conllu(conllu(JOHN, text="John eats apples"))
    assert len(sents) == 1
    assert forms(sents[0].tokens) == ["John", "eats", "apples"]
    assert sents[0].root_index() == 2


def test_parse_skips_comments_ranges_and_empty_nodes():
    text = (
        "# newdoc\n"
        "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tdel\t_\t_\t_\t_\t2\tdet\t_\t_\n"
        "1.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "2\tgato\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "\n"
    )
    sents = reorder.parse_conllu(text)
    assert forms(sents[0].tokens) == ["del", "gato"]


def test_parse_rejects_head_out_of_range():
    with pytest.raises(ConlluError) as err:
        reorder.parse_conllu(conllu([(1, "a", 5, "root")]))
    assert "sentence 0" in str(err.value)


def test_parse_rejects_multiple_roots():
    bad = [(1, "a", 0, "root"), (2, "b", 0, "root")]
    with pytest.raises(ConlluError) as err:
        reorder.parse_conllu(conllu(bad))
    assert "root" in str(err.value)


def test_parse_rejects_cycles():
    bad = [(1, "a", 2, "dep"), (2, "b", 1, "dep"), (3, "c", 0, "root")]
    with pytest.raises(ConlluError) as err:
        reorder.parse_conllu(conllu(bad))
    assert "cycle" in str(err.value)


def test_parse_rejects_wrong_column_count():
    with pytest.raises(ConlluError):
        reorder.parse_conllu("1\tonly\tthree\n\n")


@pytest.mark.parametrize(
    "pattern,expected",
    [
        ("svo", ["John", "eats", "apples"]),
        ("sov", ["John", "apples", "eats"]),
        ("ovs", ["apples", "eats", "John"]),
        ("vso", ["eats", "John", "apples"]),
        ("vos", ["eats", "apples", "John"]),
        ("osv", ["apples", "John", "eats"]),
    ],
)
def test_relinearize_three_token_clause(pattern, expected):
    sent = reorder.parse_conllu(conllu(JOHN))[0]
    assert forms(reorder.relinearize_sentence(sent, pattern)) == expected


def test_relinearize_moves_subtrees_as_blocks():
    rows = [
        (1, "the", 3, "det"),
        (2, "hungry", 3, "amod"),
        (3, "cat", 4, "nsubj"),
        (4, "chased", 0, "root"),
        (5, "a", 6, "det"),
        (6, "mouse", 4, "obj"),
        (7, "quickly", 4, "advmod"),
    ]
    sent = reorder.parse_conllu(conllu(rows))[0]
    got = forms(reorder.relinearize_sentence(sent, "sov"))
    assert got == ["the", "hungry", "cat", "a", "mouse", "chased", "quickly"]
    got_vos = forms(reorder.relinearize_sentence(sent, "vos"))
    assert got_vos == ["chased", "quickly", "a", "mouse", "the", "hungry", "cat"]


def test_relinearize_pins_sentence_final_punct():
    rows = JOHN + [(4, ".", 2, "punct")]
    sent = reorder.parse_conllu(conllu(rows))[0]
    assert forms(reorder.relinearize_sentence(sent, "vso")) == ["eats", "John", "apples", "."]
    assert forms(reorder.relinearize_sentence(sent, "sov")) == ["John", "apples", "eats", "."]


def test_relinearize_no_subject_or_object_is_identity():
    rows = [(1, "very", 2, "advmod"), (2, "nice", 0, "root"), (3, "indeed", 2, "advmod")]
    sent = reorder.parse_conllu(conllu(rows))[0]
    for pattern in reorder.OrderPattern:
        assert forms(reorder.relinearize_sentence(sent, pattern)) == ["very", "nice", "indeed"]


def _random_projective_tree(rng, n):
    """Random projective dependency tree as (id, form, head, deprel) rows."""
    deprels = ["nsubj", "obj", "iobj", "det", "amod", "advmod", "nmod", "punct", "xcomp"]
    rows = [None] * n

    def build(lo, hi, head_pos):
        # choose this span's head, attach to head_pos, recurse on fragments
        h = rng.randrange(lo, hi + 1)
        deprel = "root" if head_pos == 0 else rng.choice(deprels)
        rows[h - 1] = (h, f"w{h}", head_pos, deprel)
        for a, b in ((lo, h - 1), (h + 1, hi)):
            pos = a
            while pos <= b:
                end = rng.randrange(pos, b + 1)
                build(pos, end, h)
                pos = end + 1

    build(1, n, 0)
    return rows


def descendants(sent, idx):
    kids = {}
    for t in sent.tokens:
        kids.setdefault(t.head, []).append(t.index)
    out = set()
    stack = [idx]
    while stack:
        cur = stack.pop()
        out.add(cur)
        stack.extend(kids.get(cur, []))
    return out


def test_relinearize_multiset_and_contiguity_on_random_trees():
    rng = random.Random(202)
    for _ in range(120):
        n = rng.randrange(1, 16)
        sent = reorder.parse_conllu(conllu(_random_projective_tree(rng, n)))[0]
        for pattern in reorder.OrderPattern:
            out = reorder.relinearize_sentence(sent, pattern)
            assert sorted(t.index for t in out) == list(range(1, n + 1))
            position = {t.index: i for i, t in enumerate(out)}
            for idx in range(1, n + 1):
                desc = {position[i] for i in descendants(sent, idx)}
                assert max(desc) - min(desc) + 1 == len(desc), (sent, pattern.value, idx)


def _dataset_and_parses():
    d = make_dataset(
        [("John eats apples", [("q1", "who eats", [("apples", 10)])])]
    )
    parses = reorder.parse_conllu(
        conllu(JOHN) + conllu([(1, "who", 2, "nsubj"), (2, "eats", 0, "root")])
    )
    return d, parses


def test_reorder_dataset_single_token_answers_exact():
    d, parses = _dataset_and_parses()
    out, counts = reorder.reorder_dataset(
        d, parses, reorder.OrderPattern.SOV, RecoveryPolicy(mode="train")
    )
    _, paragraph, qa = next(out.iter_qas())
    assert paragraph.context == "John apples eats"
    assert qa.question == "who eats"
    assert qa.answers[0] == corpus.Answer("apples", 5)
    assert counts["recovered"] == 1 and counts["exact"] == 1
    corpus.validate_dataset(out)


def test_reorder_dataset_native_order_no_relations_is_whitespace_identity():
    d = make_dataset([("very  nice indeed", [("q1", "how nice", [("nice", 6)])])])
    parses = reorder.parse_conllu(
        conllu([(1, "very", 2, "advmod"), (2, "nice", 0, "root"), (3, "indeed", 2, "advmod")])
        + conllu([(1, "how", 2, "advmod"), (2, "nice", 0, "root")])
    )
    out, _ = reorder.reorder_dataset(
        d, parses, reorder.OrderPattern.SVO, RecoveryPolicy(mode="train")
    )
    _, paragraph, qa = next(out.iter_qas())
    assert paragraph.context == "very nice indeed"  # double space collapsed
    assert qa.answers[0] == corpus.Answer("nice", 5)


def test_reorder_dataset_split_answer_follows_policy():
    # "eats apples" is split by SOV; the fuzzy match must stay within threshold
    d = make_dataset([("John eats apples", [("q1", "what", [("eats apples", 5)])])])
    parses = reorder.parse_conllu(conllu(JOHN) + conllu([(1, "what", 0, "root")]))
    out, counts = reorder.reorder_dataset(
        d, parses, reorder.OrderPattern.SOV, RecoveryPolicy(mode="test")
    )
    _, paragraph, qa = next(out.iter_qas())
    assert paragraph.context == "John apples eats"
    assert counts["total"] == 1
    # m=11 so the threshold is 10; some span is always within that budget here
    assert counts["recovered"] == 1
    assert qa.answers[0].text in paragraph.context


def test_reorder_dataset_misalignment_error():
    d, _ = _dataset_and_parses()
    wrong = reorder.parse_conllu(
        conllu([(1, "Mary", 2, "nsubj"), (2, "eats", 0, "root"), (3, "apples", 2, "obj")])
        + conllu([(1, "who", 2, "nsubj"), (2, "eats", 0, "root")])
    )
    with pytest.raises(AlignmentError) as err:
        reorder.reorder_dataset(d, wrong, "sov", RecoveryPolicy())
    assert "Mary" in str(err.value)


def test_reorder_dataset_leftover_parses_error():
    d, parses = _dataset_and_parses()
    extra = parses + reorder.parse_conllu(conllu([(1, "orphan", 0, "root")]))
    with pytest.raises(AlignmentError):
        reorder.reorder_dataset(d, extra, "sov", RecoveryPolicy())
