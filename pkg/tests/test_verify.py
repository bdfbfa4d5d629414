import json

import numpy as np
import pytest

from nlsmkdv.verify import (
    DEFAULT_TOLERANCES,
    IDENTITY_DESCRIPTIONS,
    corpus_to_json,
    generate_corpus,
    load_corpus,
    report_json,
    run_suite,
)


def test_bundled_corpus_is_reproducible(corpus):
    regenerated = generate_corpus(0, 20)
    assert [name for name, _ in corpus] == [name for name, _ in regenerated]
    for (_, a), (_, b) in zip(corpus, regenerated):
        assert np.max(np.abs(a.values - b.values)) < 1e-14


def test_corpus_properties(corpus):
    assert len(corpus) == 20
    for _, u in corpus:
        assert u.real
        assert np.max(np.abs(u.resample(16 * u.size))) <= 1.0 + 1e-12
        k = np.abs(np.fft.fftshift(u.wavenumbers()))
        assert np.max(np.abs(u.coeffs()[k > 3])) < 1e-14


def test_corpus_file_roundtrip(tmp_path):
    entries = generate_corpus(5, 3)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(corpus_to_json(entries)))
    back = load_corpus(path)
    assert [n for n, _ in back] == ["random_5", "random_6", "random_7"]


def test_every_identity_is_described():
    assert set(DEFAULT_TOLERANCES) == set(IDENTITY_DESCRIPTIONS)


def test_run_suite_small_and_report():
    results = run_suite(generate_corpus(3, 2), n_spec=2, heavy=1, flow_t_end=0.001)
    assert all(r.passed for r in results), [r.message() for r in results if not r.passed]
    report = json.loads(report_json(results))
    assert report["all_pass"] and report["n_checks"] == len(results)
    names = {r["identity"] for r in report["results"]}
    assert names == set(DEFAULT_TOLERANCES)


def test_tolerance_validation():
    with pytest.raises(KeyError):
        run_suite(generate_corpus(0, 1), tolerances={"nope": 1e-6}, heavy=0)
    with pytest.raises(ValueError):
        run_suite(generate_corpus(0, 1), tolerances={"xi_identity": 1e-15}, heavy=0)
