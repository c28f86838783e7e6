import numpy as np
import pytest

import kaes


def test_hisk_examples():
    assert kaes.hisk("abab", "ba", 1, 2) == 3
    counts = kaes.ngram_counts("abab", 1, 2)
    assert counts == {"a": 2, "b": 2, "ab": 2, "ba": 1}
    assert kaes.normalize_text("Hello   World") == "hello world"
    with pytest.raises(kaes.ValidationError):
        kaes.ngram_counts("abc", 3, 2)


def test_gram_matrix_and_svr():
    essays, vectors = kaes.synthetic_corpus(40, seed=3)
    texts = [e["text"] for e in essays]
    ids = [e["id"] for e in essays]
    k = kaes.hisk_gram(texts, ids, n_min=1, n_max=6)
    assert k.kind == "hisk-normalized"
    v = k.values
    assert v.shape == (40, 40)
    assert np.allclose(np.diag(v), 1.0)
    assert np.allclose(v, v.T)
    assert np.linalg.eigvalsh(v).min() >= -1e-8 * np.trace(v)

    y = [e["unit_score"] for e in essays]
    model = kaes.train_nu_svr(k, y, kaes.SvrConfig(c=10.0, nu=0.5))
    assert model.converged
    assert abs(sum(model.coefficients)) < 1e-9
    pred = kaes.predict(model, k)
    assert len(pred) == 40
    assert np.corrcoef(pred, y)[0, 1] > 0.5


def test_boswe_and_fusion():
    essays, vectors = kaes.synthetic_corpus(20, seed=4)
    assert vectors.dim == 16
    words = vectors.words
    mat = np.stack([vectors[w] for w in words])
    book = kaes.fit_codebook(mat, k=12, seed=1)
    assert book.centroids.shape == (12, 16)
    hs = [kaes.build_histogram(book, kaes.tokenize(e["text"]), vectors) for e in essays]
    assert all(abs(h.mass() - 1.0) < 1e-12 for h in hs)
    ids = [e["id"] for e in essays]
    kb = kaes.boswe_gram(hs, ids)
    kh = kaes.hisk_gram([e["text"] for e in essays], ids, n_max=5)
    fused = kaes.sum_kernels(kh, kb)
    assert fused.kind == "fused"
    assert np.allclose(fused.values, kh.values + kb.values)


def test_linear_gram_concatenation():
    rng = np.random.default_rng(0)
    x1, x2 = rng.normal(size=(7, 3)), rng.normal(size=(7, 5))
    lhs = kaes.sum_kernels(kaes.linear_gram(x1), kaes.linear_gram(x2)).values
    rhs = kaes.linear_gram(np.hstack([x1, x2])).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_qwk():
    assert kaes.qwk([0, 0, 1, 1], [0, 0, 1, 1], 0, 1).kappa == 1.0
    assert abs(kaes.qwk([0, 0, 1, 1], [0, 1, 0, 1], 0, 1).kappa) < 1e-12
    assert kaes.qwk([0, 1, 2], [2, 1, 0], 0, 2).kappa < 0
    with pytest.raises(kaes.ValidationError):
        kaes.qwk([0, 5], [0, 1], 0, 3)


def test_scores():
    r = kaes.asap_score_range(1)
    assert (r.min, r.max) == (2, 12)
    assert kaes.scale_score(12, r) == 1.0
    assert kaes.unscale_score(0.5, r) == 7


def test_in_domain_run(tmp_path):
    essays, vectors = kaes.synthetic_corpus(60, seed=5)
    cfg = kaes.ExperimentConfig()
    cfg.representations = [kaes.Representation.hisk, kaes.Representation.fused]
    cfg.k = 20
    cfg.repetitions = 1
    cfg.ngrams = (1, 8)
    cfg.cache_dir = str(tmp_path)
    table = kaes.run_in_domain(cfg, essays, vectors)
    assert len(table.cells) == 2
    assert all(c.ok() and c.runs == 5 for c in table.cells)
    first = table.report("csv")
    again = kaes.run_in_domain(cfg, essays, vectors).report("csv")
    assert first == again
    assert first.splitlines()[0].startswith("mode,key,representation")


def test_file_round_trips(tmp_path):
    essays, vectors = kaes.synthetic_corpus(12, seed=6)
    k = kaes.hisk_gram([e["text"] for e in essays], [e["id"] for e in essays], n_max=4)
    path = str(tmp_path / "k.kaeskm")
    k.save(path)
    back = kaes.load_kernel(path)
    assert back.row_ids == k.row_ids
    assert np.array_equal(back.values, k.values)

    vpath = str(tmp_path / "v.bin")
    vectors.save(vpath)
    loaded = kaes.load_word2vec(vpath)
    assert loaded.words == vectors.words
    assert np.array_equal(loaded["omega"], vectors["omega"])
    with pytest.raises(kaes.FormatError):
        open(str(tmp_path / "bad.bin"), "wb").write(b"2 x\n")
        kaes.load_word2vec(str(tmp_path / "bad.bin"))
