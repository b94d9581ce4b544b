import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prune_dc.mu import MuAtom, MuDistribution, expect, from_model


def test_atom_validation():
    with pytest.raises(ValueError):
        MuAtom(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        MuAtom(1.0, math.inf, 0.5)
    with pytest.raises(ValueError):
        MuAtom(1.0, 1.0, -0.1)


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        MuDistribution((MuAtom(1.0, 0.0, 0.5), MuAtom(2.0, 0.0, 0.4)))
    with pytest.raises(ValueError):
        MuDistribution(())


def test_from_model_scales_coefficients():
    mu = from_model([1.0, 4.0, 9.0, 16.0], [1.0, 0.0, -0.5, 2.0])
    np.testing.assert_allclose(mu.b, 2.0 * np.array([1.0, 0.0, -0.5, 2.0]))
    np.testing.assert_allclose(mu.w, 0.25)
    assert mu.provenance == "constructed-from-model"


def test_from_model_errors():
    with pytest.raises(ValueError):
        from_model([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        from_model([1.0, 0.0], [1.0, 1.0])


def test_expect_constant_and_moment():
    mu = MuDistribution.from_arrays([1.0, 3.0], [2.0, -2.0], [0.25, 0.75])
    assert expect(mu, lambda lam, b: 1.0) == 1.0
    assert expect(mu, lambda lam, b: lam) == pytest.approx(2.5, abs=1e-15)
    assert expect(mu, lambda lam, b: b) == pytest.approx(-1.0, abs=1e-15)


def test_expect_rejects_non_finite():
    mu = MuDistribution.from_arrays([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        expect(mu, lambda lam, b: np.where(b > 0, np.inf, 0.0))


def test_arrays_are_read_only():
    mu = MuDistribution.from_arrays([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        mu.lam[0] = 5.0


@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=30))
def test_expect_is_linear(lams):
    mu = MuDistribution.from_arrays(lams, np.arange(len(lams), dtype=float))
    a = expect(mu, lambda lam, b: 2.0 * lam + b)
    assert a == pytest.approx(2.0 * expect(mu, lambda lam, b: lam) + expect(mu, lambda lam, b: b), rel=1e-12, abs=1e-12)
