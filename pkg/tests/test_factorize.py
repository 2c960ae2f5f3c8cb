import math

import numpy as np
import pytest

from arcgap.factorize import (
    EuclideanSplit,
    euclidean_split,
    log_det_factorized,
    residue_permutation,
)
from arcgap.logdet import log_det
from arcgap.symbol import ArcConfiguration, build_matrix


def test_euclidean_split_examples():
    assert euclidean_split(23, 5) == EuclideanSplit(23, 5, 4, 3)
    assert euclidean_split(100, 5) == EuclideanSplit(100, 5, 20, 0)
    assert euclidean_split(4, 7) == EuclideanSplit(4, 7, 0, 4)
    assert euclidean_split(0, 3) == EuclideanSplit(0, 3, 0, 0)
    with pytest.raises(ValueError):
        euclidean_split(-1, 3)
    with pytest.raises(ValueError):
        euclidean_split(5, 0)
    with pytest.raises(ValueError):
        EuclideanSplit(10, 3, 3, 2)


def test_degenerate_m_greater_than_N():
    # n1 = 0, n2 = N: D_N = eps^N exactly
    res = log_det_factorized(ArcConfiguration(7, 0.4), 4)
    assert float(res.value) == pytest.approx(4 * math.log(0.4), abs=1e-13)


def test_m_equal_one_reduces_to_log_det():
    config = ArcConfiguration(1, 0.35)
    for N in (0, 1, 2, 17, 40):
        direct = log_det(config, N).value
        fact = log_det_factorized(config, N).value
        assert abs(float(direct - fact)) < 1e-12


def test_identity_dev_grid():
    for m in (2, 3, 5, 7):
        for eps in (0.1, 0.5, 0.9):
            config = ArcConfiguration(m, eps)
            for N in (1, 2, 9, 23, 41):
                diff = log_det(config, N).value - log_det_factorized(config, N).value
                assert abs(float(diff)) <= 1e-9, (m, eps, N)


def test_identity_spec_example():
    config = ArcConfiguration(5, 0.5)
    diff = log_det(config, 23).value - log_det_factorized(config, 23).value
    assert abs(float(diff)) <= 1e-9


def test_residue_permutation_block_witness():
    # after sorting indices by residue mod m the matrix must be exactly
    # block diagonal with single-arc blocks: n2 blocks of n1+1, m-n2 of n1
    for m, eps, N in [(3, 0.4, 11), (5, 0.5, 23), (4, 0.83, 18), (2, 0.17, 9)]:
        config = ArcConfiguration(m, eps)
        split = euclidean_split(N, m)
        perm = residue_permutation(N, m)
        assert sorted(perm) == list(range(N))

        dense = build_matrix(config, N).dense()
        permuted = dense[np.ix_(perm, perm)]

        sizes = [split.n1 + 1] * split.n2 + [split.n1] * (m - split.n2)
        assert sum(sizes) == N
        single = ArcConfiguration(1, eps)
        offset = 0
        expected = np.zeros_like(permuted)
        for size in sizes:
            if size:
                block = build_matrix(single, size).dense()
                expected[offset : offset + size, offset : offset + size] = block
            offset += size
        # identical closed forms: equality must be exact, entry by entry
        assert np.array_equal(permuted, expected)


def test_result_provenance_fields():
    res = log_det_factorized(ArcConfiguration(5, 0.5), 23)
    assert res.method == "levinson"
    assert res.N == 23
    assert res.config.m == 5
    assert 0 < res.min_pivot_ratio <= 1
