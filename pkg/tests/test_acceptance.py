"""Acceptance suite: one check per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
verdict lines.
"""

import itertools
import json
import math
import os
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from biasaudit import (
    PredictionRecord,
    SimilarityGraph,
    TokenCounterConfig,
    aggregate_votes,
    binomial_lower_tail,
    binomial_upper_tail,
    chunk_document,
    classification_report,
    consistency_report,
    label_frequencies,
    lexrank_scores,
    load_attributions,
    save_lexicon,
    similarity_graph,
    summarize_budget,
    topk_membership,
    weighted_average,
)
from biasaudit.cli import main
from biasaudit.errors import SchemaError
from biasaudit.preprocess import normalized_words
from biasaudit.summarizer import CentralityConfig

from conftest import make_doc, make_unit
from test_summarizer import stationary_by_solve


@contextmanager
def criterion(name: str):
    started = time.time()
    try:
        yield
    except BaseException:
        print(f"\n[FAIL] {name}")
        raise
    print(f"\n[PASS] {name} ({time.time() - started:.2f}s)")


def test_binomial_golden_values():
    # The published dismissal rows are generated by the 4-decimal base rate
    # 0.7623 (the prose rounds it to 0.762, which does not reproduce them);
    # the approval rows use 0.2377 as printed.
    with criterion("binomial golden values (dismissal null 0.7623, approval null 0.2377)"):
        assert binomial_upper_tail(3928, 3132, 0.7623) == pytest.approx(8.363595e-08, rel=1e-3)
        assert binomial_upper_tail(144, 63, 0.2377) == pytest.approx(1.094425e-07, rel=1e-3)
        assert binomial_upper_tail(695, 214, 0.2377) == pytest.approx(1.422505e-05, rel=1e-3)


def test_binomial_oracle_equivalence_and_properties():
    with criterion("exact-rational oracle (n<=30) + tail properties on 1000 random triples"):
        for p in (0.1, 0.2377, 0.5, 0.762):
            fp = Fraction(p)
            for n in range(1, 31):
                # exact pmf terms, summed high-to-low into exact tails
                terms = [
                    math.comb(n, j) * fp**j * (1 - fp) ** (n - j) for j in range(n + 1)
                ]
                tail = Fraction(0)
                for k in range(n, -1, -1):
                    tail += terms[k]
                    got = binomial_upper_tail(n, k, p)
                    assert abs(Fraction(got) - tail) <= Fraction(1, 10**12) * tail

        rng = random.Random(2024)
        for _ in range(1000):
            n = rng.randint(2, 3000)
            k = rng.randint(1, n)
            p = rng.choice([0.1, 0.2377, 0.5, 0.762, rng.uniform(0.02, 0.98)])
            upper = binomial_upper_tail(n, k, p)
            assert binomial_upper_tail(n, k - 1, p) >= upper  # monotone in k
            assert upper + binomial_lower_tail(n, k - 1, p) == pytest.approx(1.0, abs=1e-9)


def test_label_frequency_fixture():
    with criterion("label frequencies reproduce the 45,516/59,709 base rate"):
        units = [make_unit(f"d{i}#0", 0) for i in range(45_516)]
        units += [make_unit(f"a{i}#0", 1) for i in range(59_709 - 45_516)]
        pi0, _ = label_frequencies(units)
        assert pi0 == pytest.approx(0.7623, abs=5e-5)


def test_chunking_properties_synthetic_corpus():
    with criterion("chunking on 500 synthetic documents: lossless, bounded, labeled, parallel-deterministic"):
        rng = random.Random(7)
        config = TokenCounterConfig()
        docs = [
            make_doc(
                f"doc{i:03d}",
                " ".join(f"w{rng.randrange(4000)}" for _ in range(rng.randint(5, 900))),
                label=rng.randint(0, 1),
                language=rng.choice(["de", "fr", "it"]),
            )
            for i in range(500)
        ]
        sequential = [chunk_document(d, config) for d in docs]
        for doc, units in zip(docs, sequential):
            assert " ".join(u.text for u in units) == normalized_words(doc.text)
            if units[0].kind == "chunk":
                assert all(u.word_count <= 300 for u in units)
            assert all(u.label == doc.label for u in units)

        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=8) as pool:
            parallel = list(pool.map(lambda d: chunk_document(d, config), docs))
        flat_seq = sorted((u for batch in sequential for u in batch), key=lambda u: (u.doc_id, u.index))
        flat_par = sorted((u for batch in parallel for u in batch), key=lambda u: (u.doc_id, u.index))
        assert flat_seq == flat_par


@pytest.mark.skipif(
    "BIASAUDIT_SJP_CORPUS" not in os.environ,
    reason="full-corpus chunk counts need the real corpus and model token counts "
    "(set BIASAUDIT_SJP_CORPUS and BIASAUDIT_SJP_COUNTS)",
)
def test_chunking_full_corpus_counts():
    from biasaudit.jsonio import read_corpus
    from biasaudit.preprocess import load_external_counts

    corpus = read_corpus(os.environ["BIASAUDIT_SJP_CORPUS"])
    counts = load_external_counts(os.environ["BIASAUDIT_SJP_COUNTS"])
    config = TokenCounterConfig(mode="external_counts", external_counts=counts)
    with criterion("chunk counts on the full corpus: 123,207 train / 36,386 test"):
        train = [d for d in corpus if d.split == "train"]
        test = [d for d in corpus if d.split == "test"]
        assert len(train) == 59_709 and len(test) == 17_357
        n_train = sum(len(chunk_document(d, config)) for d in train)
        n_test = sum(len(chunk_document(d, config)) for d in test)
        assert (n_train, n_test) == (123_207, 36_386)


def test_summarizer_budget_and_oracle(hand_segmented):
    with criterion("summarizer: budget respected on fixtures, n<=6 scores match linear solve, uniform ties exact"):
        counter = TokenCounterConfig()
        for language, sentences in hand_segmented.items():
            for take in (3, 10, 25, 50):
                unit = summarize_budget(" ".join(sentences[:take]), language, counter)
                if unit.word_count and " " in unit.text:
                    assert unit.token_count <= 512

        tight = CentralityConfig(epsilon=1e-12, max_iterations=20_000)
        rng = np.random.default_rng(99)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            sims = rng.uniform(0, 1, size=(n, n))
            weights = (sims + sims.T) / 2
            np.fill_diagonal(weights, 1.0)
            graph = SimilarityGraph(n=n, weights=weights)
            scores = lexrank_scores(graph, tight)
            assert np.max(np.abs(scores - stationary_by_solve(graph))) < 1e-6

        uniform = lexrank_scores(similarity_graph(["Le recours est rejeté."] * 5))
        assert len(set(uniform.tolist())) == 1


def test_vote_aggregation_exhaustive():
    with criterion("vote aggregation matches brute-force majority on every multiset of size <= 7 (ties -> dismissal)"):
        for size in range(1, 8):
            for combo in itertools.product([0, 1], repeat=size):
                records = [
                    PredictionRecord(unit_id=f"d#{i}", predicted=v) for i, v in enumerate(combo)
                ]
                expected = 1 if sum(combo) > size - sum(combo) else 0
                assert aggregate_votes(records)["d"].predicted == expected


def test_metrics_reconstruction_and_oracle():
    # the published summarized-run table for the second seed prints weighted
    # F1 0.93, which is inconsistent with its own per-class values (~0.79);
    # that cell is excluded from golden checks (see the metrics report docs)
    with criterion("weighted F1 reconstruction equals 0.73 +/- 0.005; random confusions match hand oracle exactly"):
        assert weighted_average([0.79, 0.48], [14_026, 3_331]) == pytest.approx(0.73, abs=0.005)

        rng = random.Random(5)
        for _ in range(300):
            tp0, fn0, fp0, tn0 = (rng.randint(0, 15) for _ in range(4))
            if tp0 + fn0 + fp0 + tn0 == 0:
                tp0 = 1
            pairs = [(0, 0)] * tp0 + [(1, 0)] * fn0 + [(0, 1)] * fp0 + [(1, 1)] * tn0
            report = classification_report(pairs)

            def div(a, b):
                return a / b if b else 0.0

            p0, r0 = div(tp0, tp0 + fp0), div(tp0, tp0 + fn0)
            p1, r1 = div(tn0, tn0 + fn0), div(tn0, tn0 + fp0)
            assert report.per_class[0].precision == p0
            assert report.per_class[0].recall == r0
            assert report.per_class[1].precision == p1
            assert report.per_class[1].recall == r1
            assert report.accuracy == div(tp0 + tn0, tp0 + fn0 + fp0 + tn0)


def _planted_corpus(tmp_path: Path, full_lexicon) -> Path:
    """2,000 single-unit documents; 'victime' planted at 80% label 0,
    'menacé' planted exactly at the 50% base rate."""
    save_lexicon(full_lexicon, tmp_path / "lexicon_full.tsv")
    docs = []

    def doc(i, label, body):
        return {
            "id": f"doc{i:04d}", "language": "fr", "label": label,
            "split": "train", "text": body,
        }

    i = 0
    for k in range(200):
        label = 0 if k < 160 else 1
        docs.append(doc(i, label, f"La victime demande la parole au proces numero {k}."))
        i += 1
    for k in range(200):
        label = 0 if k < 100 else 1
        docs.append(doc(i, label, f"Le temoin menacé garde le silence au proces numero {k}."))
        i += 1
    zeros, ones = 740, 860
    for k in range(zeros + ones):
        label = 0 if k < zeros else 1
        docs.append(doc(i, label, f"Le dossier numero {k} est transmis au greffe sans retard."))
        i += 1
    with (tmp_path / "corpus.jsonl").open("w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d, ensure_ascii=False) + "\n")
    config = {
        "corpus": "corpus.jsonl",
        "lexicon": "lexicon_full.tsv",
        "out_dir": "out1",
        "mode": "chunk",
        "test": {"min_count": 5},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def test_end_to_end_planted_bias(tmp_path, full_lexicon):
    with criterion("end-to-end planted bias: 80/20 descriptor flagged, base-rate descriptor not, byte-identical reruns"):
        started = time.time()
        config = _planted_corpus(tmp_path, full_lexicon)
        for out_dir in ("out1", "out2"):
            assert main(["prepare", "--config", str(config), "--out-dir", out_dir]) == 0
            assert main(["analyze", "--config", str(config), "--out-dir", out_dir]) == 0

        biased = json.loads((tmp_path / "out1/biased_descriptors.json").read_text())
        assert "victime" in biased["dismissal"]
        assert "menacé" not in biased["dismissal"] + biased["approval"]

        for name in sorted(p.name for p in (tmp_path / "out1").iterdir()):
            first = (tmp_path / "out1" / name).read_bytes()
            second = (tmp_path / "out2" / name).read_bytes()
            if name.startswith("manifest"):
                a, b = json.loads(first), json.loads(second)
                a.pop("timestamp"), b.pop("timestamp")
                assert a == b, name
            else:
                assert first == second, name
        assert time.time() - started < 30


def test_attribution_analysis(tmp_path, full_lexicon):
    with criterion("attribution: planted sign flagged at consistency 1.0, top-k monotone, schema rejected"):
        rng = random.Random(13)
        records = []
        for i in range(15):
            words = [f"mot{j}" for j in range(40)]
            attributions = [round(rng.uniform(-0.8, 0.8), 3) for _ in range(40)]
            at = rng.randrange(40)
            words[at] = "victime"
            attributions[at] = 0.3
            records.append(
                {
                    "unit_id": f"u{i}#0", "predicted": rng.randint(0, 1),
                    "true_label": rng.randint(0, 1), "attribution_target": 0,
                    "words": words, "attributions": attributions,
                }
            )
        path = tmp_path / "attributions.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for row in records:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        loaded = load_attributions(path)

        reports = consistency_report(loaded, full_lexicon)
        victime = next(r for r in reports if r.descriptor == "victime")
        assert victime.consistency == 1.0 and victime.flagged

        topk = {r.k: r for r in topk_membership(loaded, full_lexicon, ks=[5, 10, 20, 40])}
        counts = [topk[k].occurrences_in_topk for k in (5, 10, 20, 40)]
        assert counts == sorted(counts)

        bad = dict(records[0], attributions=records[0]["attributions"][:-1])
        bad_path = tmp_path / "bad.jsonl"
        bad_path.write_text(json.dumps(bad) + "\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_attributions(bad_path)
