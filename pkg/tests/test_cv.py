import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppl_lab.cv import (CvScheme, mccv_masks, mccv_splits, multinomial_masks, multinomial_splits,
                        nested_masks, nested_triples, sequential_multinomial_labels)
from ppl_lab.geometry import PointPattern

from conftest import random_pattern


def as_set(x):
    return set(map(tuple, x.xy))


def check_partition(split, x):
    parts = [as_set(split.training), as_set(split.validation)]
    if split.evaluation is not None:
        parts.append(as_set(split.evaluation))
    total = sum(len(p) for p in parts)
    assert total == len(x)
    assert set().union(*parts) == as_set(x)


def test_scheme_validation():
    with pytest.raises(ValueError):
        CvScheme.mccv(1.0, 5)
    with pytest.raises(ValueError):
        CvScheme.mccv(0.5, 0)
    with pytest.raises(ValueError):
        CvScheme.multinomial(1)
    assert CvScheme.multinomial(4).p == 0.25
    s = CvScheme.mccv(0.3, 10)
    assert CvScheme.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        CvScheme.from_dict({"kind": "kfold", "k": 3})


def test_mccv_k1_partition(rng):
    x = random_pattern(rng, 30)
    for p in (0.1, 0.5, 0.9):
        (split,) = mccv_splits(x, p, 1, seed=3)
        check_partition(split, x)
        assert split.p == p


def test_mccv_p_error(rng):
    with pytest.raises(ValueError):
        mccv_splits(random_pattern(rng, 5), 0.0, 3, seed=1)


def test_mccv_mean_validation_size(rng):
    x = random_pattern(rng, 200)
    m = mccv_masks(x, 0.5, 10000, seed=4)
    sizes = m.validation.sum(1)
    assert abs(sizes.mean() - 100) <= 3 * math.sqrt(200 * 0.25) / 100


def test_mccv_retention_frequency_per_point(rng):
    x = random_pattern(rng, 20)
    m = mccv_masks(x, 0.3, 10000, seed=5)
    freq = m.validation.mean(0)
    se = math.sqrt(0.3 * 0.7 / 10000)
    assert np.all(np.abs(freq - 0.3) <= 4 * se)


def test_mccv_paper_design_splits_valid(rng):
    x = random_pattern(rng, 250)
    for split in mccv_splits(x, 0.1, 400, seed=6)[:50]:
        check_partition(split, x)


def test_multinomial_partition(rng):
    x = random_pattern(rng, 60)
    splits = multinomial_splits(x, 2, seed=2)
    assert as_set(splits[0].validation) | as_set(splits[1].validation) == as_set(x)
    assert not as_set(splits[0].validation) & as_set(splits[1].validation)
    for s in splits:
        check_partition(s, x)
        assert s.p == 0.5
    with pytest.raises(ValueError):
        multinomial_splits(x, 1, seed=0)


def test_multinomial_mean_fold_size(rng):
    x = random_pattern(rng, 500)
    sizes = np.array([multinomial_masks(x, 5, seed=s).validation.sum(1) for s in range(5000)])
    se = math.sqrt(500 * 0.2 * 0.8 / 5000)
    assert np.all(np.abs(sizes.mean(0) - 100) <= 3 * se)


@given(st.integers(2, 8), st.integers(0, 40), st.integers(0, 2 ** 32))
@settings(max_examples=40, deadline=None)
def test_multinomial_folds_disjoint(k, n, seed):
    x = random_pattern(np.random.default_rng(seed), n)
    m = multinomial_masks(x, k, seed)
    assert np.all(m.validation.sum(0) == 1)
    assert np.array_equal(m.training, ~m.validation)


def test_sequential_construction_matches_iid_labels():
    k, n, reps = 4, 30, 4000
    rng = np.random.default_rng(9)
    seq = np.array([np.bincount(sequential_multinomial_labels(n, k, rng), minlength=k)
                    for _ in range(reps)])
    iid = np.array([np.bincount(rng.integers(0, k, n), minlength=k) for _ in range(reps)])
    se = math.sqrt(n * (1 / k) * (1 - 1 / k) / reps)
    assert np.all(np.abs(seq.mean(0) - n / k) <= 4 * se)
    assert np.all(np.abs(seq.var(0) - iid.var(0)) <= 0.15 * iid.var(0))


def test_nested_limit_tiny_evaluation(rng):
    x = random_pattern(rng, 50)
    for s in nested_triples(x, 1e-9, CvScheme.mccv(0.5, 5), seed=3):
        assert len(s.evaluation) == 0
        check_partition(s, x)


@pytest.mark.parametrize("scheme", [CvScheme.mccv(0.5, 20), CvScheme.multinomial(4)])
def test_nested_partition(rng, scheme):
    x = random_pattern(rng, 80)
    splits = nested_triples(x, 0.2, scheme, seed=8)
    for s in splits:
        check_partition(s, x)
    if scheme.kind == "multinomial":
        ev = as_set(splits[0].evaluation)
        assert all(as_set(s.evaluation) == ev for s in splits)


def test_nested_mean_sizes(rng):
    x = random_pattern(rng, 1000)
    m = nested_masks(x, 0.2, CvScheme.mccv(0.5, 4000), seed=2)
    sizes = np.stack([m.training.sum(1), m.validation.sum(1), m.evaluation.sum(1)], 1)
    target = np.array([400, 400, 200])
    sd = np.sqrt(1000 * np.array([0.4 * 0.6, 0.4 * 0.6, 0.2 * 0.8]))
    assert np.all(np.abs(sizes.mean(0) - target) <= 3 * sd / math.sqrt(4000))
    with pytest.raises(ValueError):
        nested_masks(x, 1.0, CvScheme.mccv(0.5, 4), seed=0)


def test_splits_deterministic(rng):
    x = random_pattern(rng, 40)
    a = mccv_masks(x, 0.4, 7, seed=123)
    b = mccv_masks(x, 0.4, 7, seed=123)
    assert np.array_equal(a.validation, b.validation)


def test_empty_pattern_splits():
    x = PointPattern.empty()
    (s,) = mccv_splits(x, 0.5, 1, seed=0)
    assert len(s.training) == len(s.validation) == 0
