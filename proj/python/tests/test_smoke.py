"""Smoke tests for the parselab python bindings."""

import math
import os

import pytest

import parselab as pl

TWO_TOKENS = (
    "1\tramah\t_\t_\tN.m.sg.nom\t_\t2\tkarta\t_\t_\n"
    "2\tgacchati\t_\t_\tV.sg.3\t_\t0\troot\t_\t_\n\n"
)


def test_conll_round_trip():
    corpus = pl.read_conll(TWO_TOKENS)
    assert len(corpus) == 1
    assert corpus.heads(0) == [2, 0]
    assert corpus.labels(0) == ["karta", "root"]
    again = pl.read_conll(pl.write_conll(corpus))
    assert again.heads(0) == [2, 0]
    assert again.forms(0) == ["ramah", "gacchati"]


def test_tree_predicates():
    assert pl.validate_tree([2, 0]) == []
    assert any(v.startswith("cycle") for v in pl.validate_tree([2, 1]))
    assert pl.is_projective([2, 0, 2])
    assert not pl.is_projective([0, 4, 1, 1])
    assert pl.nonprojectivity_degree([0, 4, 1, 1], 4, 2) == 1
    assert pl.root_distance([2, 0, 2], 1) == 2
    lifted = pl.projectivize([0, 4, 1, 1])
    assert pl.is_projective(lifted)


def test_decoders():
    scores = [[0, 10, 5], [0, 0, 8], [0, 7, 0]]
    assert pl.cle_decode(scores) == [0, 1]
    assert pl.eisner_decode(scores) == [0, 1]
    assert pl.cle_decode([[0, 1], [0, 0]]) == [0]


def test_metrics():
    uas, las = pl.micro_scores([[2, 0, 2]], [[2, 0, 1]])
    assert uas == pytest.approx(2 / 3)
    assert las == pytest.approx(2 / 3)  # bare trees carry empty labels
    assert pl.mad([0.5, 0.7]) == pytest.approx(0.1)
    t, p, degenerate = pl.paired_t_test([1, 1, 1, 1, 0], [0, 0, 0, 0, 1])
    assert t == pytest.approx(1.5)
    assert p == pytest.approx(0.208, abs=1e-3)
    assert not degenerate


def test_aux_tags_round_trip():
    heads = [2, 0, 2]
    forms = ["a", "b", "c"]
    morphs = ["M1", "M2", "M3"]
    tags = pl.extract_aux_tags(heads, forms, morphs, "relpos")
    assert pl.decode_relative_pos(tags, forms, morphs) == heads
    assert pl.extract_aux_tags(heads, forms, morphs, "children") == ["0", "2", "0"]
    assert pl.extract_aux_tags(heads, forms, morphs, "rootdist") == ["2", "1", "2"]


def test_permute_preserves_tree_shape():
    heads = [2, 0, 2, 3]
    forms = ["w1", "w2", "w3", "w4"]
    morphs = ["A", "B", "C", "D"]
    pforms, pheads = pl.permute_heads(heads, forms, morphs, seed=9)
    assert sorted(pforms) == sorted(forms)
    assert pl.validate_tree(pheads) == []
    again = pl.permute_heads(heads, forms, morphs, seed=9)
    assert again == (pforms, pheads)


def test_cli_end_to_end(tmp_path):
    train = tmp_path / "train.conll"
    sentences = []
    for i in range(12):
        noun = ["ramah", "sita", "vanam"][i % 3]
        verb = ["gacchati", "vadati"][i % 2]
        sentences.append(
            f"1\t{noun}\t_\t_\tN.nom\t_\t2\tkarta\t_\t_\n"
            f"2\t{verb}\t_\t_\tV.3\t_\t0\troot\t_\t_\n\n"
        )
    train.write_text("".join(sentences))
    conf = tmp_path / "exp.conf"
    conf.write_text("feature.hash_bits = 14\ngraph.epochs = 5\nseed = 3\n")
    model = tmp_path / "model.bin"
    pred = tmp_path / "pred.conll"

    assert pl.cli_run(["train", "--parser", "graph", "--train", str(train),
                       "--model", str(model), "--config", str(conf)]) == 0
    assert model.exists()
    assert pl.cli_run(["parse", "--model", str(model), "--input", str(train),
                       "--output", str(pred)]) == 0
    # Predictions are written into the HEAD/DEPREL columns.
    corpus = pl.read_conll_file(str(pred))
    assert corpus.heads(0) == [2, 0]
    # Usage errors come back as exit code 2.
    assert pl.cli_run(["train", "--parser", "graph"]) == 2
