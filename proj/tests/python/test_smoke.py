import pathlib

import pytest

import tweetnews as tn

ROOT = pathlib.Path(__file__).resolve().parents[2]
BLEU_FIXTURES = ROOT / "tests" / "fixtures" / "bleu"


def test_vocab_round_trip(tmp_path):
    lines = ["a cyclone hit the coast", "heavy rain flooded the town"] * 5
    vocab = tn.Vocab.train(lines, 60)
    ids = vocab.encode("heavy rain hit the coast")
    assert vocab.decode(ids) == "heavy rain hit the coast"
    vocab.save(tmp_path / "v.txt")
    assert tn.Vocab.load(tmp_path / "v.txt").encode("the town") == vocab.encode("the town")


@pytest.mark.parametrize("name", ["identity", "zero4", "clipping", "brevity", "long"])
def test_bleu_matches_frozen_oracle(name):
    hyp = (BLEU_FIXTURES / f"{name}.hyp").read_text().splitlines()
    ref = (BLEU_FIXTURES / f"{name}.ref").read_text().splitlines()
    expected = (BLEU_FIXTURES / f"{name}.expected").read_text().strip()
    assert str(tn.bleu(hyp, ref)) == expected


def test_kappa_and_welch():
    assert tn.fleiss_kappa([[4, 0, 0], [1, 2, 1], [0, 1, 3]]) == pytest.approx(15 / 47, abs=1e-12)
    r = tn.welch_t([3.1, 4.5, 2.2], [10.5, 9.1, 14.8, 12.0, 30.2, 7.7])
    assert r["t"] == pytest.approx(-3.1283501976981074, abs=1e-9)
    assert r["p"] == pytest.approx(0.023567206830332962, abs=1e-9)
    with pytest.raises(tn.DataError):
        tn.welch_t([1.0], [2.0, 3.0])


def test_corrupt_is_seeded():
    news = ["rescue workers evacuated residents in nepal on monday"] * 20
    a, stats = tn.corrupt(news, 3)
    b, _ = tn.corrupt(news, 3)
    assert a == b
    assert stats.sentences == 20


def test_kmeans_and_filters():
    pts = [[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]]
    r = tn.kmeans(pts, 2, seed=1)
    assert r["assignment"][0] == r["assignment"][1] != r["assignment"][2] == r["assignment"][3]
    assert tn.keyword_filter(["huge earthquake today", "nice lunch"]) == [0]
    assert tn.filter_by_similarity(["flood in the town", "my cat"], ["the town flood"], 0.2) == [0]


def test_merge_pairs_respect_limits():
    records = tn.generate_templated(20, 7)
    vocab = tn.Vocab.train([s for s, _ in records] + [p for _, ps in records for p in ps], 200)
    pairs, report = tn.build_merge_pairs(records + [("x", ["only one"])], vocab, 512)
    assert report["dropped"] == 1
    assert len(pairs) == 20
    assert all(src.endswith(".") for src, _ in pairs)


def test_config_errors():
    with pytest.raises(tn.ConfigError):
        tn.run_pipeline({"no.such.key": "1"}, groups=ROOT / "data" / "groups.txt", out="/tmp/never")


def test_tiny_pipeline(tmp_path):
    settings = {
        "seed": "3",
        "data.tweets": str(ROOT / "data" / "tweets.txt"),
        "data.news": str(ROOT / "data" / "news.txt"),
        "data.clauses": str(ROOT / "data" / "clauses.tsv"),
        "tokenizer.vocab_size": "400",
        "model.d_model": "16",
        "model.d_ff": "32",
        "model.max_len": "128",
        "mlm.stream_len": "128",
        "mlm.steps": "2",
        "style.cycles": "2",
        "merge.cycles": "2",
    }
    paragraphs, bleu = tn.run_pipeline(settings, groups=ROOT / "data" / "groups.txt",
                                       reference=ROOT / "data" / "groups_reference.txt", out=tmp_path / "run")
    assert len(paragraphs) == 4
    assert bleu.startswith("BLEU = ")
    assert (tmp_path / "run" / "paragraphs.txt").exists()
