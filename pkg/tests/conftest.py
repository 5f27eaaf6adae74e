import json

import pytest

from forgeqa import corpus


def make_doc(paragraphs, version="v1.1", title="fixture"):
    """Build a SQuAD-shaped JSON document from (context, qas) pairs."""
    return {
        "version": version,
        "data": [
            {
                "title": title,
                "paragraphs": [
                    {
                        "context": context,
                        "qas": [
                            {
                                "id": qa_id,
                                "question": question,
                                "answers": [
                                    {"text": text, "answer_start": start}
                                    for text, start in answers
                                ],
                            }
                            for qa_id, question, answers in qas
                        ],
                    }
                    for context, qas in paragraphs
                ],
            }
        ],
    }


def make_dataset(paragraphs, **kwargs) -> corpus.RcDataset:
    return corpus.parse_dataset(json.dumps(make_doc(paragraphs, **kwargs)))


@pytest.fixture
def cat_dataset() -> corpus.RcDataset:
    return make_dataset([("the cat sat", [("q1", "who sat?", [("cat", 4)])])])
