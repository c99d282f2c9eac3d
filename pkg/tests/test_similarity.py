import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from strass.errors import EmptySet, ZeroVector
from strass.similarity import cos_plus, cos_sim, ncos_plus, rcos_plus

R2 = 1 / math.sqrt(2)
THREE = [[1.0, 0.0], [0.0, 1.0], [R2, R2]]


def chain_oracle(X, y):
    """Straight pure-Python evaluation of the normalization chain."""

    def cos(a, b):
        return sum(p * q for p, q in zip(a, b)) / math.sqrt(sum(p * p for p in a) * sum(q * q for q in b))

    plus = [(cos(x, y) + 1) / 2 for x in X]
    mean = statistics.fmean(plus)
    std = statistics.pstdev(plus)
    r = [0.5 + (p - mean) / std for p in plus]
    return r, [v / max(r) for v in r]


class TestCosine:
    @pytest.mark.parametrize("x, y, expected", [
        ([1, 0], [1, 0], 1.0),
        ([1, 0], [0, 1], 0.0),
        ([1, 2], [2, 4], 1.0),
        ([1, 0], [-3, 0], -1.0),
    ])
    def test_values(self, x, y, expected):
        assert cos_sim(x, y) == pytest.approx(expected, abs=1e-15)

    def test_clamped(self):
        x = [0.1, 0.2, 0.3]
        assert -1.0 <= cos_sim(x, x) <= 1.0

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cos_sim([0, 0], [1, 0])

    @pytest.mark.parametrize("y, expected", [([2, 0], 1.0), ([-1, 0], 0.0), ([0, 5], 0.5)])
    def test_cos_plus(self, y, expected):
        assert cos_plus([1, 0], y) == pytest.approx(expected, abs=1e-15)

    @given(arrays(np.float64, 6, elements=st.floats(-10, 10)),
           arrays(np.float64, 6, elements=st.floats(-10, 10)),
           st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_positive_scale_invariance(self, x, y, a, b):
        if np.linalg.norm(x) < 1e-3 or np.linalg.norm(y) < 1e-3:
            return
        assert cos_sim(a * x, b * y) == pytest.approx(cos_sim(x, y), abs=1e-12)


class TestRcosPlus:
    def test_three_vectors(self):
        # cos+ = {1, 0.5, 0.853553...}; mean 0.784518, population std 0.209880
        r = rcos_plus(THREE, [1, 0])
        np.testing.assert_allclose(r, [1.5266923072552911, -0.8556211560271623, 0.8289288487718696],
                                   rtol=0, atol=1e-12)
        oracle, _ = chain_oracle(THREE, [1, 0])
        np.testing.assert_allclose(r, oracle, rtol=0, atol=1e-12)

    def test_identical_rows(self):
        np.testing.assert_array_equal(rcos_plus([[1, 2], [1, 2], [2, 4]], [3, -1]), [0.5] * 3)

    def test_single_row(self):
        np.testing.assert_array_equal(rcos_plus([[1, 2]], [3, -1]), [0.5])

    def test_empty(self):
        with pytest.raises(EmptySet):
            rcos_plus(np.zeros((0, 2)), [1, 0])

    def test_zero_row(self):
        with pytest.raises(ZeroVector):
            rcos_plus([[1, 0], [0, 0]], [1, 0])

    def test_centred_unit_std(self, rng):
        for _ in range(50):
            X = rng.normal(size=(int(rng.integers(2, 12)), 5))
            r = rcos_plus(X, rng.normal(size=5))
            assert abs(r.mean() - 0.5) < 1e-9
            assert abs(r.std() - 1.0) < 1e-9


class TestNcosPlus:
    def test_three_vectors(self):
        n = ncos_plus(THREE, [1, 0])
        assert n[0] == 1.0
        np.testing.assert_allclose(n[1:], [-0.5604411261922253, 0.5429573757806703], rtol=0, atol=1e-12)

    def test_identical_rows_all_one(self):
        np.testing.assert_array_equal(ncos_plus([[1, 1], [2, 2]], [0, 1]), [1.0, 1.0])

    def test_matches_oracle(self, rng):
        for _ in range(20):
            X = rng.normal(size=(6, 4))
            y = rng.normal(size=4)
            _, oracle = chain_oracle(X.tolist(), y.tolist())
            np.testing.assert_allclose(ncos_plus(X, y), oracle, rtol=0, atol=1e-12)

    @settings(max_examples=200)
    @given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_properties(self, m, seed, scale):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(m, 4))
        y = rng.normal(size=4)
        n = ncos_plus(X, y)
        assert n.max() == 1.0
        np.testing.assert_allclose(ncos_plus(scale * X, scale * y), n, rtol=0, atol=1e-9)
        # the chain is increasing in cosine, so rankings agree
        cos = np.array([cos_sim(x, y) for x in X])
        if np.ptp(cos) > 1e-9:
            order = np.argsort(-cos, kind="stable")
            assert np.all(np.diff(n[order]) <= 1e-12)
